#include "mfsp/reconstruct.hpp"

#include "mfsp/baselines.hpp"
#include "mfsp/errors.hpp"
#include "mfsp/parallel.hpp"
#include "mfsp/random.hpp"

#include <algorithm>
#include <cmath>

namespace mfsp {

Measurement simulate_measurement(const Vector& truth, const Selection& sel, const IndexSet& cand_idx,
                                 double sigma_cheap, double sigma_exp, std::uint64_t seed) {
  if (!(sigma_cheap >= 0.0) || !(sigma_exp >= 0.0)) {
    throw InvalidInput("noise standard deviations must be non-negative");
  }
  Measurement m;
  m.sel = sel.sorted();
  m.sel.validate(static_cast<Index>(cand_idx.size()));
  m.noise_seed = seed;
  m.values.resize(static_cast<Eigen::Index>(m.sel.size()));

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Index r = 0;
  for (Fidelity f : kFidelities) {
    const double sigma = f == Fidelity::cheap ? sigma_cheap : sigma_exp;
    for (Index i : m.sel.indices(f)) {
      const Index loc = cand_idx[i];
      if (loc >= static_cast<Index>(truth.size())) {
        throw InvalidInput("candidate location " + std::to_string(loc) +
                           " lies outside the state vector");
      }
      const double noise = normal(rng);
      m.values(r++) = truth(static_cast<Eigen::Index>(loc)) + sigma * noise;
    }
  }
  return m;
}

Reconstruction reconstruct(const ReducedModel& model, const FidelityClass& cheap,
                           const FidelityClass& exp, const Measurement& y) {
  const Selection sel = y.sel.sorted();
  sel.validate(model.locations());
  if (y.values.size() != static_cast<Eigen::Index>(sel.size())) {
    throw InvalidInput("measurement length does not match the selection");
  }
  // The basis describes deviations from the training mean.
  Vector centered = y.values;
  Eigen::Index r = 0;
  for (Fidelity f : kFidelities) {
    for (Index i : sel.indices(f)) {
      centered(r++) -= model.mean(static_cast<Eigen::Index>(model.cand_idx[i]));
    }
  }
  Reconstruction out;
  out.posterior = posterior(model.psi, model.prior_var, cheap, exp, sel, centered);
  out.state = model.phi * out.posterior.mean + model.mean;
  return out;
}

double relative_error(const Vector& truth, const Vector& estimate) {
  if (truth.size() != estimate.size()) {
    throw InvalidInput("relative_error: length mismatch");
  }
  const double denom = truth.norm();
  if (!(denom > 0.0)) {
    throw DegenerateInput("relative error undefined for a zero-norm truth");
  }
  return (truth - estimate).norm() / denom;
}

EvalSummary evaluate(const ReducedModel& model, const FidelityClass& cheap, const FidelityClass& exp,
                     const Selection& sel, const Matrix& test, const EvalOptions& opts) {
  if (test.cols() == 0) {
    throw InvalidInput("test set is empty");
  }
  if (test.rows() != model.phi.rows()) {
    throw InvalidInput("test snapshots have " + std::to_string(test.rows()) +
                       " locations but the model has " + std::to_string(model.phi.rows()));
  }
  sel.validate(model.locations());

  const auto count = static_cast<std::size_t>(test.cols());
  std::vector<double> errors(count, 0.0);
  std::vector<char> skipped(count, 0);
  const double sigma_cheap = opts.noise_free ? 0.0 : cheap.sigma;
  const double sigma_exp = opts.noise_free ? 0.0 : exp.sigma;

  parallel_for(count, opts.threads, [&](std::size_t s) {
    const Vector truth = test.col(static_cast<Eigen::Index>(s));
    if (!(truth.norm() > 0.0)) {
      skipped[s] = 1;
      return;
    }
    const Measurement y = simulate_measurement(truth, sel, model.cand_idx, sigma_cheap, sigma_exp,
                                               derive_seed(opts.seed, "noise", s));
    errors[s] = relative_error(truth, reconstruct(model, cheap, exp, y).state);
  });

  EvalSummary out;
  std::vector<double> kept;
  for (std::size_t s = 0; s < count; ++s) {
    if (skipped[s]) {
      out.warnings.push_back("test snapshot " + std::to_string(s) + " has zero norm; skipped");
      continue;
    }
    kept.push_back(errors[s]);
    out.evaluated.push_back(s);
  }
  if (kept.empty()) {
    throw DegenerateInput("every test snapshot has zero norm");
  }
  out.per_snapshot_rel_err = Eigen::Map<const Vector>(kept.data(), static_cast<Eigen::Index>(kept.size()));
  double sum = 0.0;
  for (double e : kept) sum += e;  // index order keeps the mean bit-stable
  out.mean_rel_err = sum / static_cast<double>(kept.size());
  out.allocation = {sel.cheap_idx.size(), sel.exp_idx.size()};
  const double budget = std::max(
      spend(sel.cheap_idx.size(), sel.exp_idx.size(), cheap, exp), cheap.cost);
  out.phi_d = phi_d(assemble_instance(model, cheap, exp, budget), sel);
  return out;
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
  std::vector<HistogramBin> out;
  if (values.empty() || bins == 0) return out;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  double hi = *hi_it;
  if (!(hi > lo)) hi = lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  out.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + width * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    if (b >= bins) b = bins - 1;
    ++out[b].count;
  }
  return out;
}

Comparison compare_designs(const ProblemInstance& inst, std::span<const DesignResult> designs,
                           const RandomSpec& spec) {
  inst.validate();
  Comparison out;
  for (const auto& d : designs) {
    DesignRow row;
    row.name = d.algorithm;
    row.k_cheap = d.selection.cheap_idx.size();
    row.k_exp = d.selection.exp_idx.size();
    row.spend = spend(row.k_cheap, row.k_exp, inst.cheap, inst.exp);
    row.phi_d = phi_d(inst, d.selection);
    out.rows.push_back(std::move(row));
  }

  if (spec.samples_per_allocation > 0) {
    const Index m = inst.locations();
    const CandidateSet candidates = prune_allocations(inst.cheap.cost, inst.exp.cost, inst.budget);
    std::uint64_t stream_index = 0;
    for (const Allocation& a : candidates.allocations) {
      if (a.k_exp > m) continue;
      const Allocation used{std::min(a.k_cheap, m - a.k_exp), a.k_exp};
      for (std::size_t s = 0; s < spec.samples_per_allocation; ++s) {
        const Selection sel =
            random_design(used, m, derive_seed(spec.seed, "random-design", stream_index++));
        out.random_phi_d.push_back(phi_d(inst, sel));
        out.random_allocations.push_back(used);
      }
    }
  }
  out.histogram = histogram(out.random_phi_d, spec.bins);
  return out;
}

}  // namespace mfsp
