#pragma once

#include "mfsp/greedy.hpp"
#include "mfsp/iterative.hpp"
#include "mfsp/model.hpp"
#include "mfsp/reduced_basis.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfsp {

/// Noisy point samples of a state at the selected candidate locations, ordered
/// cheap ascending then expensive ascending.
struct Measurement {
  Vector values;
  Selection sel;  ///< sorted
  std::uint64_t noise_seed = 0;
};

/// Samples truth[cand_idx[i]] for every selected location i and adds zero-mean
/// Gaussian noise with the sensor's standard deviation (zero means exact).
Measurement simulate_measurement(const Vector& truth, const Selection& sel, const IndexSet& cand_idx,
                                 double sigma_cheap, double sigma_exp, std::uint64_t seed);

struct Reconstruction {
  Vector state;  ///< phi * m_post + training mean
  PosteriorSummary posterior;
};

/// MAP estimate of the full state from a measurement.
Reconstruction reconstruct(const ReducedModel& model, const FidelityClass& cheap,
                           const FidelityClass& exp, const Measurement& y);

/// ||truth - estimate||_2 / ||truth||_2. Throws DegenerateInput for a zero truth.
double relative_error(const Vector& truth, const Vector& estimate);

struct EvalOptions {
  std::uint64_t seed = 0;
  bool noise_free = false;
  unsigned threads = 1;
};

struct EvalSummary {
  Vector per_snapshot_rel_err;  ///< one entry per evaluated snapshot
  std::vector<Index> evaluated; ///< test-set column of each entry
  double mean_rel_err = 0.0;
  double phi_d = 0.0;
  Allocation allocation;
  std::vector<std::string> warnings;
};

/// Reconstructs every test snapshot (columns of `test`, raw uncentered values) from
/// simulated measurements and averages the relative errors. Snapshot s draws its
/// noise from sub-stream ("noise", s) of `opts.seed`.
EvalSummary evaluate(const ReducedModel& model, const FidelityClass& cheap, const FidelityClass& exp,
                     const Selection& sel, const Matrix& test, const EvalOptions& opts = {});

struct DesignRow {
  std::string name;
  std::size_t k_cheap = 0;
  std::size_t k_exp = 0;
  double spend = 0.0;
  double phi_d = 0.0;
  std::optional<double> mean_rel_err;
};

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

struct RandomSpec {
  std::size_t samples_per_allocation = 1000;
  std::uint64_t seed = 0;
  std::size_t bins = 40;
};

struct Comparison {
  std::vector<DesignRow> rows;
  std::vector<double> random_phi_d;
  std::vector<Allocation> random_allocations;  ///< allocation of each random sample
  std::vector<HistogramBin> histogram;
};

/// Equal-width histogram over [min, max] of `values`; the last bin is closed.
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins);

/// Tabulates Phi_D (recomputed) for every design and draws random designs for every
/// pruned allocation as a baseline.
Comparison compare_designs(const ProblemInstance& inst, std::span<const DesignResult> designs,
                           const RandomSpec& spec = {});

}  // namespace mfsp
