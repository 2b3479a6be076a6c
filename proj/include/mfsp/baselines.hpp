#pragma once

#include "mfsp/greedy.hpp"
#include "mfsp/iterative.hpp"
#include "mfsp/model.hpp"

#include <cstdint>
#include <span>

namespace mfsp {

/// Uniformly random disjoint cheap/expensive sets of the requested sizes over M
/// locations. Deterministic for a fixed seed on a given platform.
Selection random_design(const Allocation& alloc, Index locations, std::uint64_t seed);

/// Largest M accepted by exhaustive_search (3^12 = 531441 assignments).
inline constexpr Index kExhaustiveMaxLocations = 12;

/// Enumerates every assignment of {none, cheap, expensive} per location that fits the
/// budget and returns a maximizer of Phi_D. `order`, when given, is the permutation
/// of locations in which assignments are enumerated; the first maximizer found wins.
DesignResult exhaustive_search(const ProblemInstance& inst, std::span<const Index> order = {});

/// Single-location instance on which greedy attains exactly `eps` of the optimum:
/// sigma_ch = sqrt(x / (e^eps - 1)), sigma_exp = sqrt(x / (e - 1)), c = (eps / 2, 1),
/// b = 1, where x = a^T a and `direction` plays the role of Sigma_pr^{1/2} Psi^T.
ProblemInstance counterexample_instance(double eps, const Vector& direction);

enum class Regime { cheap_favored, expensive_favored, critical };

std::string_view to_string(Regime r);

struct RegimeVerdict {
  double ratio_cost = 0.0;   ///< c_ch / c_exp
  double ratio_noise = 0.0;  ///< sigma_exp^2 / sigma_ch^2
  Regime regime = Regime::critical;
};

/// First-order (small-signal) prediction of which fidelity greedy prefers. Advisory
/// only: the log(1 + x) curvature can override it for large gains.
RegimeVerdict predict_regime(const FidelityClass& cheap, const FidelityClass& exp);

}  // namespace mfsp
