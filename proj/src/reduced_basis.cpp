#include "mfsp/reduced_basis.hpp"

#include "mfsp/errors.hpp"

#include <cmath>
#include <string>

namespace mfsp {

SnapshotMatrix make_snapshots(Matrix data, bool center) {
  if (data.cols() < 2) {
    throw InvalidInput("at least two snapshots are required");
  }
  if (data.rows() < 1) {
    throw InvalidInput("snapshots must have at least one location");
  }
  if (!data.allFinite()) {
    throw InvalidInput("snapshot data contains non-finite entries");
  }
  SnapshotMatrix out;
  out.centered = center;
  if (center) {
    out.mean = data.rowwise().mean();
    data.colwise() -= out.mean;
  } else {
    out.mean = Vector::Zero(data.rows());
  }
  out.data = std::move(data);
  return out;
}

std::pair<Matrix, Matrix> split_chronological(const Matrix& data, double train_frac) {
  if (!(train_frac > 0.0 && train_frac <= 1.0)) {
    throw InvalidInput("train fraction must lie in (0, 1]");
  }
  const auto p = data.cols();
  const auto n_train = static_cast<Eigen::Index>(std::llround(train_frac * static_cast<double>(p)));
  if (n_train < 1) {
    throw InvalidInput("train fraction leaves no training snapshots");
  }
  return {data.leftCols(n_train), data.rightCols(p - n_train)};
}

Index modes_for_energy(const Vector& sing_vals, double energy, EnergyMeasure measure) {
  if (!(energy > 0.0 && energy <= 1.0)) {
    throw InvalidInput("energy threshold must lie in (0, 1]");
  }
  const Vector w = measure == EnergyMeasure::squared ? Vector(sing_vals.array().square())
                                                     : sing_vals;
  const double total = w.sum();
  if (!(total > 0.0)) {
    throw DegenerateInput("spectrum has zero energy");
  }
  double running = 0.0;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    running += w(k);
    // Relative slack keeps energy = 1.0 reachable despite summation roundoff.
    if (running / total >= energy * (1.0 - 1e-14)) return static_cast<Index>(k + 1);
  }
  return static_cast<Index>(w.size());
}

ReducedBasis build_reduced_basis(const SnapshotMatrix& snapshots, const BasisOptions& opts) {
  if (!(opts.energy > 0.0 && opts.energy <= 1.0)) {
    throw InvalidInput("energy threshold must lie in (0, 1]");
  }
  if (snapshots.data.cols() < 2) {
    throw InvalidInput("at least two snapshots are required");
  }
  if (!snapshots.data.allFinite()) {
    throw InvalidInput("snapshot data contains non-finite entries");
  }
  if (opts.max_modes && *opts.max_modes == 0) {
    throw InvalidInput("max_modes must be positive");
  }

  Eigen::BDCSVD<Matrix> svd(snapshots.data, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0)) {
    throw DegenerateInput("snapshot data is identically zero");
  }

  // Numerical rank: discard singular values at roundoff level.
  const double tol = s(0) * 1e-13 * static_cast<double>(std::max(snapshots.data.rows(),
                                                                  snapshots.data.cols()));
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > tol) ++rank;

  Index ell = modes_for_energy(s.head(rank), opts.energy, opts.measure);
  if (opts.max_modes) ell = std::min(ell, *opts.max_modes);

  ReducedBasis out;
  out.phi = svd.matrixU().leftCols(static_cast<Eigen::Index>(ell));
  out.sing_vals = s.head(static_cast<Eigen::Index>(ell));
  return out;
}

Vector prior_covariance(const Vector& sing_vals, double lambda, Index snapshot_count) {
  if (snapshot_count < 2) {
    throw InvalidInput("prior covariance needs at least two snapshots (p >= 2)");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidInput("lambda must be positive and finite");
  }
  const double scale = lambda * lambda / static_cast<double>(snapshot_count - 1);
  return scale * sing_vals.array().square().matrix();
}

Matrix restrict_to_candidates(const Matrix& phi, const IndexSet& cand_idx) {
  if (cand_idx.empty()) {
    throw InvalidInput("candidate set must not be empty");
  }
  Matrix psi(static_cast<Eigen::Index>(cand_idx.size()), phi.cols());
  for (std::size_t r = 0; r < cand_idx.size(); ++r) {
    const Index i = cand_idx[r];
    if (i >= static_cast<Index>(phi.rows())) {
      throw InvalidInput("candidate index " + std::to_string(i) + " out of range (N = " +
                         std::to_string(phi.rows()) + ")");
    }
    if (r > 0 && i <= cand_idx[r - 1]) {
      throw InvalidInput("candidate indices must be strictly increasing");
    }
    psi.row(static_cast<Eigen::Index>(r)) = phi.row(static_cast<Eigen::Index>(i));
  }
  return psi;
}

Matrix ReducedModel::prior_sqrt_psi_t() const {
  return prior_var.cwiseSqrt().asDiagonal() * psi.transpose();
}

ReducedModel make_reduced_model(const SnapshotMatrix& train, double lambda,
                                const BasisOptions& opts, IndexSet cand_idx) {
  ReducedBasis basis = build_reduced_basis(train, opts);
  ReducedModel model;
  model.prior_var = prior_covariance(basis.sing_vals, lambda, train.count());
  if (cand_idx.empty()) {
    cand_idx.resize(train.locations());
    for (Index i = 0; i < cand_idx.size(); ++i) cand_idx[i] = i;
  }
  model.psi = restrict_to_candidates(basis.phi, cand_idx);
  model.cand_idx = std::move(cand_idx);
  model.phi = std::move(basis.phi);
  model.sing_vals = std::move(basis.sing_vals);
  model.mean = train.mean;
  model.lambda = lambda;
  model.snapshot_count = train.count();
  model.energy = opts.energy;
  model.measure = opts.measure;
  model.centered = train.centered;
  return model;
}

ProblemInstance assemble_instance(const ReducedModel& model, const FidelityClass& cheap,
                                  const FidelityClass& exp, double budget) {
  return ProblemInstance::from_shared(model.prior_sqrt_psi_t(), cheap, exp, budget);
}

}  // namespace mfsp
