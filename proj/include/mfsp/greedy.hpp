#pragma once

#include "mfsp/model.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace mfsp {

/// One accepted greedy step. `phi_d` is the objective after the step.
struct TraceStep {
  std::size_t step = 0;  ///< 1-based
  Fidelity fidelity = Fidelity::cheap;
  Index location = 0;
  double gain_per_cost = 0.0;
  double phi_d = 0.0;
};

/// Candidate-set statistics attached to iterative runs.
struct IterativeStats {
  std::size_t candidates = 0;   ///< |K| after pruning
  std::size_t refinements = 0;  ///< completed refinement iterations, summed over candidates
};

struct DesignResult {
  std::string algorithm;
  Selection selection;  ///< in insertion order
  double phi_d = 0.0;
  double spend = 0.0;
  double budget = 0.0;
  std::vector<TraceStep> trace;
  std::optional<IterativeStats> iterative;
};

/// Relative tolerance under which two gain-per-cost values count as tied. Ties go
/// to the cheap fidelity, then to the lowest location index.
inline constexpr double kTieRelTol = 1e-12;

constexpr bool strictly_better(double candidate, double incumbent) {
  const double mag = incumbent < 0.0 ? -incumbent : incumbent;
  return candidate > incumbent + kTieRelTol * mag;
}

/// Maintains D_j = B^{-1} A_j for both fidelities under rank-one additions to B.
///
/// B itself is never formed. The referenced instance must outlive the state.
class ShermanMorrisonState {
 public:
  explicit ShermanMorrisonState(const ProblemInstance& inst);

  /// a^T B^{-1} a for column `location` of A_f, clamped at zero within roundoff.
  double quad_form(Fidelity f, Index location) const;

  /// log(1 + a^T B^{-1} a), the increase in log det B from adding this sensor.
  double gain(Fidelity f, Index location) const;

  /// Adds the sensor (f, location) to B and refreshes D for every fidelity with
  /// `refresh[j]` set. Returns the realized gain.
  double add(Fidelity f, Index location, std::array<bool, 2> refresh = {true, true});

  const Matrix& d(Fidelity f) const { return d_[static_cast<int>(f)]; }

  /// Running log det B, the sum of realized gains.
  double log_det() const { return log_det_; }

 private:
  const ProblemInstance* inst_;
  std::array<Matrix, 2> d_;
  double log_det_ = 0.0;
};

/// Multifidelity greedy with Phi_D recomputed from scratch for every candidate.
DesignResult greedy_naive(const ProblemInstance& inst);

/// Multifidelity greedy using Sherman-Morrison updates of D_j. Produces the same
/// selection sequence as greedy_naive.
DesignResult greedy_sm(const ProblemInstance& inst);

}  // namespace mfsp
