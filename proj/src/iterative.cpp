#include "mfsp/iterative.hpp"

#include "mfsp/errors.hpp"
#include "mfsp/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace mfsp {

std::uint64_t max_affordable(double residual, double cost) {
  if (!(residual > 0.0)) return 0;
  const double limit = residual * (1.0 + kBudgetSlack);
  auto k = static_cast<std::uint64_t>(std::floor(residual / cost));
  while (static_cast<double>(k + 1) * cost <= limit) ++k;
  while (k > 0 && static_cast<double>(k) * cost > limit) --k;
  return k;
}

CandidateSet prune_allocations(double cost_cheap, double cost_exp, double budget) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(cost_cheap) || !positive(cost_exp) || !positive(budget)) {
    throw InvalidInput("costs and budget must be positive and finite");
  }
  if (!(cost_cheap < cost_exp)) {
    throw InvalidInput("cheap cost must be strictly below expensive cost");
  }
  const FidelityClass cheap{cost_cheap, 1.0};
  const FidelityClass exp{cost_exp, 1.0};

  CandidateSet out;
  const std::uint64_t max_exp = max_affordable(budget, cost_exp);
  out.bound = max_exp + 1;
  for (std::uint64_t k_exp = 0; k_exp <= max_exp; ++k_exp) {
    const double residual = budget - cost_exp * static_cast<double>(k_exp);
    const std::uint64_t k_cheap = max_affordable(residual, cost_cheap);
    out.feasible_count += k_cheap + 1;
    // Any smaller k_cheap leaves room for one more cheap sensor. The maximal one is
    // dominated when a cheap sensor can be upgraded to an expensive one.
    const bool upgradable = k_cheap > 0 && fits_budget(k_cheap - 1, k_exp + 1, cheap, exp, budget);
    if (!upgradable) out.allocations.push_back({k_cheap, k_exp});
  }
  if (cost_cheap > budget) out.allocations.clear();
  return out;
}

IndexSet greedy_select(const ProblemInstance& inst, Fidelity f, std::size_t k,
                       const IndexSet& prev) {
  const Index m = inst.locations();
  if (k + prev.size() > m) {
    throw InvalidInput("greedy_select: k + |prev| exceeds the number of locations");
  }
  std::vector<char> used(m, 0);
  ShermanMorrisonState state(inst);
  for (Index i : prev) {
    if (i >= m || used[i]) throw InvalidInput("greedy_select: invalid previous selection");
    used[i] = 1;
    state.add(other(f), i);
  }

  std::array<bool, 2> refresh{};
  refresh[static_cast<int>(f)] = true;

  IndexSet picked;
  picked.reserve(k);
  while (picked.size() < k) {
    Index best_i = m;
    double best_gain = 0.0;
    for (Index i = 0; i < m; ++i) {
      if (used[i]) continue;
      const double g = state.gain(f, i);
      if (best_i == m || strictly_better(g, best_gain)) {
        best_i = i;
        best_gain = g;
      }
    }
    used[best_i] = 1;
    picked.push_back(best_i);
    if (picked.size() < k) state.add(f, best_i, refresh);
  }
  return picked;
}

namespace {

Selection make_selection(const IndexSet& cheap, const IndexSet& exp) { return {cheap, exp}; }

CandidateOutcome refine_candidate(const ProblemInstance& inst, Allocation requested,
                                  std::size_t max_iters) {
  CandidateOutcome out;
  out.requested = requested;
  const Index m = inst.locations();
  if (requested.k_exp > m) {
    out.skipped = true;
    out.warning = "allocation needs " + std::to_string(requested.k_exp) +
                  " expensive sensors but only " + std::to_string(m) + " locations exist";
    out.used = requested;
    return out;
  }
  // Expensive sensors dominate, so excess demand is trimmed from the cheap side.
  out.used = {std::min(requested.k_cheap, m - requested.k_exp), requested.k_exp};
  const std::size_t k_cheap = out.used.k_cheap;
  const std::size_t k_exp = out.used.k_exp;

  IndexSet s_cheap;
  IndexSet s_exp = greedy_select(inst, Fidelity::expensive, k_exp, {});
  double current = phi_d(inst, make_selection(s_cheap, s_exp));
  out.best = make_selection(s_cheap, s_exp);
  out.phi_d = current;

  auto consider = [&](const IndexSet& c, const IndexSet& e, double value) {
    if (value > out.phi_d) {
      out.phi_d = value;
      out.best = make_selection(c, e);
    }
  };

  for (std::size_t t = 1; t <= max_iters; ++t) {
    IndexSet cheap_next = greedy_select(inst, Fidelity::cheap, k_cheap, s_exp);
    double value = phi_d(inst, make_selection(cheap_next, s_exp));
    consider(cheap_next, s_exp, value);
    if (value <= current) break;
    s_cheap = std::move(cheap_next);
    current = value;

    IndexSet exp_next = greedy_select(inst, Fidelity::expensive, k_exp, s_cheap);
    value = phi_d(inst, make_selection(s_cheap, exp_next));
    consider(s_cheap, exp_next, value);
    if (value <= current) break;
    s_exp = std::move(exp_next);
    current = value;
    ++out.refinements;
  }
  return out;
}

}  // namespace

IterativeReport iterative_select(const ProblemInstance& inst, const IterativeOptions& opts) {
  inst.validate();
  if (opts.max_iters < 1) {
    throw InvalidInput("max_iters must be at least 1");
  }
  const CandidateSet candidates = prune_allocations(inst.cheap.cost, inst.exp.cost, inst.budget);
  const auto& allocs = candidates.allocations;

  IterativeReport report;
  report.per_candidate.resize(allocs.size());

  // Each candidate writes only its own slot, so aggregation below does not depend
  // on the thread count.
  parallel_for(allocs.size(), opts.threads, [&](std::size_t c) {
    report.per_candidate[c] = refine_candidate(inst, allocs[c], opts.max_iters);
  });

  DesignResult& winner = report.winner;
  winner.algorithm = "iterative";
  winner.budget = inst.budget;
  const CandidateOutcome* best = nullptr;
  for (const auto& outcome : report.per_candidate) {
    report.total_refinements += outcome.refinements;
    if (outcome.skipped) continue;
    if (best == nullptr || strictly_better(outcome.phi_d, best->phi_d) ||
        (!strictly_better(best->phi_d, outcome.phi_d) &&
         outcome.best.exp_idx.size() < best->best.exp_idx.size())) {
      best = &outcome;
    }
  }
  if (best != nullptr) {
    winner.selection = best->best;
    winner.phi_d = best->phi_d;
  }
  winner.spend =
      spend(winner.selection.cheap_idx.size(), winner.selection.exp_idx.size(), inst.cheap, inst.exp);
  winner.iterative = IterativeStats{allocs.size(), report.total_refinements};
  return report;
}

}  // namespace mfsp
