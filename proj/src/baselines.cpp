#include "mfsp/baselines.hpp"

#include "mfsp/errors.hpp"
#include "mfsp/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace mfsp {

Selection random_design(const Allocation& alloc, Index locations, std::uint64_t seed) {
  if (alloc.k_cheap + alloc.k_exp > locations) {
    throw InvalidInput("random_design: allocation (" + std::to_string(alloc.k_cheap) + ", " +
                       std::to_string(alloc.k_exp) + ") exceeds " + std::to_string(locations) +
                       " locations");
  }
  IndexSet perm(locations);
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  // Partial Fisher-Yates: only the prefix that is handed out needs to be shuffled.
  const std::size_t take = alloc.k_cheap + alloc.k_exp;
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, locations - 1);
    std::swap(perm[i], perm[pick(rng)]);
  }
  Selection sel;
  sel.cheap_idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(alloc.k_cheap));
  sel.exp_idx.assign(perm.begin() + static_cast<std::ptrdiff_t>(alloc.k_cheap),
                     perm.begin() + static_cast<std::ptrdiff_t>(take));
  return sel.sorted();
}

namespace {

struct Enumerator {
  const ProblemInstance& inst;
  std::span<const Index> order;
  Selection current;
  Selection best;
  double best_phi = 0.0;
  bool have_best = false;

  void visit(std::size_t pos) {
    if (pos == order.size()) {
      const double value = phi_d(inst, current);
      if (!have_best || value > best_phi) {
        best_phi = value;
        best = current;
        have_best = true;
      }
      return;
    }
    const Index loc = order[pos];
    visit(pos + 1);
    for (Fidelity f : kFidelities) {
      const std::size_t k_cheap = current.cheap_idx.size() + (f == Fidelity::cheap);
      const std::size_t k_exp = current.exp_idx.size() + (f == Fidelity::expensive);
      if (!fits_budget(k_cheap, k_exp, inst.cheap, inst.exp, inst.budget)) continue;
      current.indices(f).push_back(loc);
      visit(pos + 1);
      current.indices(f).pop_back();
    }
  }
};

}  // namespace

DesignResult exhaustive_search(const ProblemInstance& inst, std::span<const Index> order) {
  inst.validate();
  const Index m = inst.locations();
  if (m > kExhaustiveMaxLocations) {
    throw InvalidInput("exhaustive search refuses M = " + std::to_string(m) + " (limit " +
                       std::to_string(kExhaustiveMaxLocations) + ")");
  }
  IndexSet identity(m);
  std::iota(identity.begin(), identity.end(), Index{0});
  if (order.empty()) {
    order = identity;
  } else {
    IndexSet check(order.begin(), order.end());
    std::sort(check.begin(), check.end());
    if (check != identity) throw InvalidInput("enumeration order must be a permutation of 0..M-1");
  }

  Enumerator e{inst, order, {}, {}, 0.0, false};
  e.visit(0);

  DesignResult result;
  result.algorithm = "exhaustive";
  result.selection = e.best.sorted();
  result.phi_d = e.best_phi;
  result.budget = inst.budget;
  result.spend =
      spend(result.selection.cheap_idx.size(), result.selection.exp_idx.size(), inst.cheap, inst.exp);
  return result;
}

ProblemInstance counterexample_instance(double eps, const Vector& direction) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw InvalidInput("counterexample: eps must lie in (0, 1)");
  }
  const double x = direction.squaredNorm();
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw InvalidInput("counterexample: direction must be a nonzero finite vector");
  }
  const FidelityClass cheap{eps / 2.0, std::sqrt(x / std::expm1(eps))};
  const FidelityClass exp{1.0, std::sqrt(x / (std::numbers::e - 1.0))};
  return ProblemInstance::from_shared(direction, cheap, exp, 1.0);
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::cheap_favored: return "cheap-favored";
    case Regime::expensive_favored: return "expensive-favored";
    case Regime::critical: return "critical";
  }
  return "unknown";
}

RegimeVerdict predict_regime(const FidelityClass& cheap, const FidelityClass& exp) {
  RegimeVerdict v;
  v.ratio_cost = cheap.cost / exp.cost;
  v.ratio_noise = (exp.sigma * exp.sigma) / (cheap.sigma * cheap.sigma);
  const double scale = std::max(std::abs(v.ratio_cost), std::abs(v.ratio_noise));
  if (std::abs(v.ratio_cost - v.ratio_noise) <= 1e-12 * scale) {
    v.regime = Regime::critical;
  } else if (v.ratio_cost < v.ratio_noise) {
    v.regime = Regime::cheap_favored;
  } else {
    v.regime = Regime::expensive_favored;
  }
  return v;
}

}  // namespace mfsp
