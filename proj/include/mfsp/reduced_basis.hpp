#pragma once

#include "mfsp/model.hpp"

#include <optional>
#include <utility>

namespace mfsp {

/// Raw field snapshots, one column per snapshot (N x p). When `centered` is set,
/// `mean` holds the column mean that was subtracted from `data`.
struct SnapshotMatrix {
  Matrix data;
  Vector mean;
  bool centered = false;

  Index locations() const { return static_cast<Index>(data.rows()); }
  Index count() const { return static_cast<Index>(data.cols()); }
};

/// Wraps raw data; subtracts the per-location mean when `center` is true.
/// Requires at least two snapshots and finite entries.
SnapshotMatrix make_snapshots(Matrix data, bool center);

/// Chronological split: the first round(train_frac * p) columns train, the rest test.
std::pair<Matrix, Matrix> split_chronological(const Matrix& data, double train_frac);

/// How cumulative singular-value energy is measured for truncation.
enum class EnergyMeasure {
  squared,  ///< sum of s_i^2 (Frobenius energy); default
  linear,   ///< sum of s_i
};

struct BasisOptions {
  double energy = 0.99;
  std::optional<Index> max_modes;
  EnergyMeasure measure = EnergyMeasure::squared;
};

struct ReducedBasis {
  Matrix phi;        ///< N x l, orthonormal columns
  Vector sing_vals;  ///< l positive values, non-increasing
};

/// Thin SVD of the snapshot data, truncated at the smallest l reaching `energy`.
ReducedBasis build_reduced_basis(const SnapshotMatrix& snapshots, const BasisOptions& opts = {});

/// Number of leading modes needed to capture `energy` of the spectrum.
Index modes_for_energy(const Vector& sing_vals, double energy, EnergyMeasure measure);

/// Diagonal of Sigma_pr = lambda^2 / (p - 1) * Sigma_l^2.
Vector prior_covariance(const Vector& sing_vals, double lambda, Index snapshot_count);

/// Rows of `phi` at the candidate locations. Indices must be strictly increasing.
Matrix restrict_to_candidates(const Matrix& phi, const IndexSet& cand_idx);

/// Everything needed to pose design problems and reconstruct states.
struct ReducedModel {
  Matrix phi;
  Vector sing_vals;
  Vector prior_var;
  Matrix psi;
  IndexSet cand_idx;
  Vector mean;  ///< zero vector when the training data was not centered
  double lambda = 0.01;
  Index snapshot_count = 0;
  double energy = 0.99;
  EnergyMeasure measure = EnergyMeasure::squared;
  bool centered = true;

  Index dim() const { return static_cast<Index>(phi.cols()); }
  Index locations() const { return static_cast<Index>(psi.rows()); }

  /// Sigma_pr^{1/2} Psi^T, the fidelity-independent part of both A matrices.
  Matrix prior_sqrt_psi_t() const;
};

/// Builds the full model from training snapshots. An empty `cand_idx` selects all
/// N locations.
ReducedModel make_reduced_model(const SnapshotMatrix& train, double lambda,
                                const BasisOptions& opts = {}, IndexSet cand_idx = {});

/// A_j = sigma_j^{-1} Sigma_pr^{1/2} Psi^T for both fidelities.
ProblemInstance assemble_instance(const ReducedModel& model, const FidelityClass& cheap,
                                  const FidelityClass& exp, double budget);

}  // namespace mfsp
