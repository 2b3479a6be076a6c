#pragma once

#include "mfsp/greedy.hpp"
#include "mfsp/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mfsp {

struct Allocation {
  std::size_t k_cheap = 0;
  std::size_t k_exp = 0;

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Result of pruning the feasible (k_cheap, k_exp) allocations.
struct CandidateSet {
  std::vector<Allocation> allocations;  ///< ascending k_exp
  std::uint64_t feasible_count = 0;     ///< number of feasible allocations before pruning
  std::uint64_t bound = 0;              ///< floor(1 + b / c_exp)
};

/// Largest k with k * cost <= residual, tolerant to representation error in the
/// quotient.
std::uint64_t max_affordable(double residual, double cost);

/// Keeps, for every k_exp, the maximal k_cheap, and drops it when a cheap sensor could
/// be upgraded to an expensive one within the budget. Returns an empty set when
/// c_cheap > b.
CandidateSet prune_allocations(double cost_cheap, double cost_exp, double budget);

/// Greedily picks `k` locations of fidelity `f`, conditioned on the sensors in `prev`
/// being already placed with the other fidelity. Returned in pick order.
IndexSet greedy_select(const ProblemInstance& inst, Fidelity f, std::size_t k,
                       const IndexSet& prev);

struct CandidateOutcome {
  Allocation requested;  ///< allocation as produced by pruning
  Allocation used;       ///< after clamping k_cheap + k_exp <= M
  Selection best;
  double phi_d = 0.0;
  std::size_t refinements = 0;
  bool skipped = false;
  std::string warning;
};

struct IterativeReport {
  std::vector<CandidateOutcome> per_candidate;
  std::size_t total_refinements = 0;
  DesignResult winner;
};

struct IterativeOptions {
  std::size_t max_iters = 20;
  unsigned threads = 1;
};

/// Phase I pruning followed by alternating per-fidelity greedy refinement of every
/// candidate allocation. The winner maximizes Phi_D; ties go to fewer expensive
/// sensors, then to the earlier candidate.
IterativeReport iterative_select(const ProblemInstance& inst, const IterativeOptions& opts = {});

}  // namespace mfsp
