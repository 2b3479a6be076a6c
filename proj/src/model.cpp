#include "mfsp/model.hpp"

#include "mfsp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfsp {

std::string_view to_string(Fidelity f) { return f == Fidelity::cheap ? "cheap" : "expensive"; }

void validate_fidelities(const FidelityClass& cheap, const FidelityClass& exp) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(cheap.cost) || !positive(exp.cost)) {
    throw InvalidInput("sensor costs must be positive and finite");
  }
  if (!positive(cheap.sigma) || !positive(exp.sigma)) {
    throw InvalidInput("noise standard deviations must be positive and finite");
  }
  if (!(cheap.cost < exp.cost)) {
    throw InvalidInput("cheap sensors must cost strictly less than expensive sensors");
  }
  if (!(cheap.sigma > exp.sigma)) {
    throw InvalidInput("cheap sensors must be strictly noisier than expensive sensors");
  }
}

ProblemInstance ProblemInstance::from_shared(const Matrix& prior_sqrt_psi_t, FidelityClass cheap,
                                             FidelityClass exp, double budget) {
  validate_fidelities(cheap, exp);
  ProblemInstance inst;
  inst.a_cheap = prior_sqrt_psi_t / cheap.sigma;
  inst.a_exp = prior_sqrt_psi_t / exp.sigma;
  inst.cheap = cheap;
  inst.exp = exp;
  inst.budget = budget;
  inst.validate();
  return inst;
}

void ProblemInstance::validate() const {
  validate_fidelities(cheap, exp);
  if (!std::isfinite(budget) || budget <= 0.0) {
    throw InvalidInput("budget must be positive and finite");
  }
  if (a_cheap.rows() < 1 || a_cheap.cols() < 1) {
    throw InvalidInput("A matrices must have at least one row and one column");
  }
  if (a_cheap.rows() != a_exp.rows() || a_cheap.cols() != a_exp.cols()) {
    throw InvalidInput("A_cheap and A_exp must have identical shapes");
  }
  if (!a_cheap.allFinite() || !a_exp.allFinite()) {
    throw InvalidInput("A matrices contain non-finite entries");
  }
  // Both matrices share the factor Sigma_pr^{1/2} Psi^T.
  const Matrix lhs = a_cheap * cheap.sigma;
  const Matrix rhs = a_exp * exp.sigma;
  const double scale = std::max(lhs.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff());
  if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1e-300)) {
    throw InvalidInput("A_cheap * sigma_cheap must equal A_exp * sigma_exp");
  }
}

Selection Selection::sorted() const {
  Selection out = *this;
  std::sort(out.cheap_idx.begin(), out.cheap_idx.end());
  std::sort(out.exp_idx.begin(), out.exp_idx.end());
  return out;
}

void Selection::validate(Index locations) const {
  std::vector<char> used(locations, 0);
  for (Fidelity f : kFidelities) {
    for (Index i : indices(f)) {
      if (i >= locations) {
        throw InvalidInput("sensor index " + std::to_string(i) + " out of range (M = " +
                           std::to_string(locations) + ")");
      }
      if (used[i]) {
        throw InvalidInput("location " + std::to_string(i) + " selected more than once");
      }
      used[i] = 1;
    }
  }
}

bool fits_budget(std::size_t k_cheap, std::size_t k_exp, const FidelityClass& cheap,
                 const FidelityClass& exp, double budget) {
  return spend(k_cheap, k_exp, cheap, exp) <= budget * (1.0 + kBudgetSlack);
}

double spend(std::size_t k_cheap, std::size_t k_exp, const FidelityClass& cheap,
             const FidelityClass& exp) {
  return cheap.cost * static_cast<double>(k_cheap) + exp.cost * static_cast<double>(k_exp);
}

Matrix information_matrix(const ProblemInstance& inst, const Selection& sel) {
  sel.validate(inst.locations());
  // Accumulate in ascending order so equal sets give bit-identical results.
  const Selection ordered = sel.sorted();
  const auto dim = static_cast<Eigen::Index>(inst.dim());
  Matrix b = Matrix::Identity(dim, dim);
  for (Fidelity f : kFidelities) {
    const Matrix& a = inst.a(f);
    for (Index i : ordered.indices(f)) {
      const auto col = a.col(static_cast<Eigen::Index>(i));
      b.selfadjointView<Eigen::Lower>().rankUpdate(col);
    }
  }
  return b.selfadjointView<Eigen::Lower>();
}

double spd_log_det(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalBreakdown("Cholesky factorization failed: matrix is not positive definite");
  }
  const auto diag = llt.matrixLLT().diagonal();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) sum += std::log(diag(i));
  return 2.0 * sum;
}

double phi_d(const ProblemInstance& inst, const Selection& sel) {
  if (!inst.a_cheap.allFinite() || !inst.a_exp.allFinite()) {
    throw InvalidInput("A matrices contain non-finite entries");
  }
  if (sel.empty()) return 0.0;
  return spd_log_det(information_matrix(inst, sel));
}

double marginal_gain(const Eigen::Ref<const Vector>& b_inv_col,
                     const Eigen::Ref<const Vector>& a_col) {
  if (b_inv_col.size() != a_col.size()) {
    throw InvalidInput("marginal_gain: vector lengths differ");
  }
  double q = a_col.dot(b_inv_col);
  if (q < 0.0) {
    if (q < kQuadFormFloor) {
      throw NumericalBreakdown("negative quadratic form " + std::to_string(q) +
                               ": information matrix lost positive definiteness");
    }
    q = 0.0;
  }
  return std::log1p(q);
}

PosteriorSummary posterior(const Matrix& psi, const Vector& prior_var, const FidelityClass& cheap,
                           const FidelityClass& exp, const Selection& sel, const Vector& y) {
  const auto dim = psi.cols();
  if (prior_var.size() != dim) {
    throw InvalidInput("prior variance length does not match basis dimension");
  }
  if ((prior_var.array() <= 0.0).any() || !prior_var.allFinite()) {
    throw InvalidInput("prior variances must be positive and finite");
  }
  if (!(cheap.sigma > 0.0) || !(exp.sigma > 0.0)) {
    throw InvalidInput("noise standard deviations must be positive");
  }
  const Selection ordered = sel.sorted();
  ordered.validate(static_cast<Index>(psi.rows()));
  const auto count = static_cast<Eigen::Index>(ordered.size());
  if (y.size() != count) {
    throw InvalidInput("measurement vector has " + std::to_string(y.size()) +
                       " entries but the selection has " + std::to_string(count) + " sensors");
  }

  PosteriorSummary out;
  if (count == 0) {
    out.mean = Vector::Zero(dim);
    out.cov = prior_var.asDiagonal();
    return out;
  }

  // Whitened operator G = Sigma_noise^{-1/2} H Sigma_pr^{1/2}; then
  // Sigma_post = Sigma_pr^{1/2} (I + G^T G)^{-1} Sigma_pr^{1/2}.
  const Vector prior_sd = prior_var.cwiseSqrt();
  Matrix g(count, dim);
  Vector wy(count);
  Eigen::Index r = 0;
  for (Fidelity f : kFidelities) {
    const double w = 1.0 / (f == Fidelity::cheap ? cheap.sigma : exp.sigma);
    for (Index i : ordered.indices(f)) {
      g.row(r) = w * psi.row(static_cast<Eigen::Index>(i)).cwiseProduct(prior_sd.transpose());
      wy(r) = w * y(r);
      ++r;
    }
  }
  Matrix b = Matrix::Identity(dim, dim);
  b.selfadjointView<Eigen::Lower>().rankUpdate(g.transpose());
  Eigen::LLT<Matrix> llt(b.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) {
    throw NumericalBreakdown("posterior precision factorization failed");
  }
  const Matrix b_inv = llt.solve(Matrix::Identity(dim, dim));
  out.cov = prior_sd.asDiagonal() * b_inv * prior_sd.asDiagonal();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  out.mean = prior_sd.asDiagonal() * llt.solve(g.transpose() * wy);
  return out;
}

}  // namespace mfsp
