#include "mfsp/greedy.hpp"

#include "mfsp/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mfsp {

ShermanMorrisonState::ShermanMorrisonState(const ProblemInstance& inst)
    : inst_(&inst), d_{inst.a_cheap, inst.a_exp} {}

double ShermanMorrisonState::quad_form(Fidelity f, Index location) const {
  const auto col = static_cast<Eigen::Index>(location);
  double q = inst_->a(f).col(col).dot(d(f).col(col));
  if (q < 0.0) {
    if (q < kQuadFormFloor) {
      throw NumericalBreakdown("negative quadratic form " + std::to_string(q) + " at location " +
                               std::to_string(location));
    }
    q = 0.0;
  }
  return q;
}

double ShermanMorrisonState::gain(Fidelity f, Index location) const {
  return std::log1p(quad_form(f, location));
}

double ShermanMorrisonState::add(Fidelity f, Index location, std::array<bool, 2> refresh) {
  const auto col = static_cast<Eigen::Index>(location);
  const Vector u = inst_->a(f).col(col);
  const Vector v = d(f).col(col);
  const double denom = 1.0 + u.dot(v);
  if (!(denom > 1e-12)) {
    throw NumericalBreakdown("Sherman-Morrison denominator " + std::to_string(denom) +
                             " is not positive");
  }
  const Vector scaled_v = v / denom;
  for (Fidelity j : kFidelities) {
    if (!refresh[static_cast<int>(j)]) continue;
    Matrix& dj = d_[static_cast<int>(j)];
    const Eigen::RowVectorXd w = u.transpose() * dj;
    dj.noalias() -= scaled_v * w;
  }
  const double realized = std::log1p(denom - 1.0);
  log_det_ += realized;
  return realized;
}

namespace {

struct Pick {
  Fidelity fidelity = Fidelity::cheap;
  Index location = 0;
  double score = -std::numeric_limits<double>::infinity();
  bool found = false;
};

// Shared driver for both greedy variants. `score(f, i)` returns the raw Phi_D gain
// of adding (f, i); `accept(f, i)` commits it.
template <class Score, class Accept>
DesignResult run_greedy(const ProblemInstance& inst, std::string name, Score&& score,
                        Accept&& accept) {
  inst.validate();
  DesignResult result;
  result.algorithm = std::move(name);
  result.budget = inst.budget;

  const Index m = inst.locations();
  std::vector<char> used(m, 0);
  std::size_t counts[2] = {0, 0};
  double phi = 0.0;

  for (std::size_t step = 1;; ++step) {
    if (result.selection.size() == m) break;
    bool admissible[2];
    for (Fidelity f : kFidelities) {
      const int j = static_cast<int>(f);
      admissible[j] = fits_budget(counts[0] + (j == 0), counts[1] + (j == 1), inst.cheap, inst.exp,
                                  inst.budget);
    }
    // The cheap class is always the cheaper one, so it gates termination.
    if (!admissible[0]) break;

    Pick best;
    for (Fidelity f : kFidelities) {
      if (!admissible[static_cast<int>(f)]) continue;
      const double inv_cost = 1.0 / inst.cost(f);
      for (Index i = 0; i < m; ++i) {
        if (used[i]) continue;
        const double value = score(f, i) * inv_cost;
        if (!best.found || strictly_better(value, best.score)) {
          best = {f, i, value, true};
        }
      }
    }

    phi = accept(best.fidelity, best.location, phi);
    used[best.location] = 1;
    ++counts[static_cast<int>(best.fidelity)];
    result.selection.indices(best.fidelity).push_back(best.location);
    result.trace.push_back({step, best.fidelity, best.location, best.score, phi});
  }

  result.spend = spend(counts[0], counts[1], inst.cheap, inst.exp);
  result.phi_d = phi_d(inst, result.selection);
  return result;
}

}  // namespace

DesignResult greedy_naive(const ProblemInstance& inst) {
  Selection current;
  double current_phi = 0.0;
  auto score = [&](Fidelity f, Index i) {
    Selection trial = current;
    trial.indices(f).push_back(i);
    return phi_d(inst, trial) - current_phi;
  };
  auto accept = [&](Fidelity f, Index i, double) {
    current.indices(f).push_back(i);
    current_phi = phi_d(inst, current);
    return current_phi;
  };
  return run_greedy(inst, "greedy-naive", score, accept);
}

DesignResult greedy_sm(const ProblemInstance& inst) {
  inst.validate();
  ShermanMorrisonState state(inst);
  std::size_t counts[2] = {0, 0};
  auto score = [&](Fidelity f, Index i) { return state.gain(f, i); };
  auto accept = [&](Fidelity f, Index i, double) {
    ++counts[static_cast<int>(f)];
    // D_j is refreshed only while fidelity j remains affordable; the admissible
    // set only shrinks, so stale D_j is never read again.
    std::array<bool, 2> refresh{};
    for (Fidelity j : kFidelities) {
      const int k = static_cast<int>(j);
      refresh[k] = fits_budget(counts[0] + (k == 0), counts[1] + (k == 1), inst.cheap, inst.exp,
                               inst.budget);
    }
    state.add(f, i, refresh);
    return state.log_det();
  };
  return run_greedy(inst, "greedy", score, accept);
}

}  // namespace mfsp
