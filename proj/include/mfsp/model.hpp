#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace mfsp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = std::size_t;
using IndexSet = std::vector<Index>;

/// The two sensor classes. Cheap sensors cost less and are noisier.
enum class Fidelity { cheap = 0, expensive = 1 };

inline constexpr std::array<Fidelity, 2> kFidelities{Fidelity::cheap, Fidelity::expensive};

constexpr Fidelity other(Fidelity f) {
  return f == Fidelity::cheap ? Fidelity::expensive : Fidelity::cheap;
}

std::string_view to_string(Fidelity f);

/// Cost (budget units) and measurement-noise standard deviation of one sensor class.
struct FidelityClass {
  double cost = 1.0;
  double sigma = 1.0;
};

/// Complete input of the budget-constrained design problem.
///
/// Both A matrices are l x M and equal sigma_j^{-1} * Sigma_pr^{1/2} * Psi^T, so
/// column i of `a(j)` is the whitened observation row of a fidelity-j sensor at
/// candidate location i. Locations are 0-based throughout the library.
struct ProblemInstance {
  Matrix a_cheap;
  Matrix a_exp;
  FidelityClass cheap;
  FidelityClass exp;
  double budget = 0.0;

  /// Builds both A matrices from the shared factor Sigma_pr^{1/2} Psi^T (l x M).
  static ProblemInstance from_shared(const Matrix& prior_sqrt_psi_t, FidelityClass cheap,
                                     FidelityClass exp, double budget);

  Index dim() const { return static_cast<Index>(a_cheap.rows()); }
  Index locations() const { return static_cast<Index>(a_cheap.cols()); }
  const Matrix& a(Fidelity f) const { return f == Fidelity::cheap ? a_cheap : a_exp; }
  const FidelityClass& fidelity(Fidelity f) const { return f == Fidelity::cheap ? cheap : exp; }
  double cost(Fidelity f) const { return fidelity(f).cost; }

  /// Throws InvalidInput unless every documented invariant holds.
  void validate() const;
};

/// Validates cost/noise ordering of a fidelity pair: 0 < c_ch < c_exp, sigma_ch > sigma_exp > 0.
void validate_fidelities(const FidelityClass& cheap, const FidelityClass& exp);

/// Disjoint cheap/expensive location sets.
struct Selection {
  IndexSet cheap_idx;
  IndexSet exp_idx;

  const IndexSet& indices(Fidelity f) const { return f == Fidelity::cheap ? cheap_idx : exp_idx; }
  IndexSet& indices(Fidelity f) { return f == Fidelity::cheap ? cheap_idx : exp_idx; }
  std::size_t size() const { return cheap_idx.size() + exp_idx.size(); }
  bool empty() const { return cheap_idx.empty() && exp_idx.empty(); }

  /// Copy with both index lists sorted ascending.
  Selection sorted() const;

  /// Throws InvalidInput on out-of-range indices or on a location used twice.
  void validate(Index locations) const;

  friend bool operator==(const Selection&, const Selection&) = default;
};

struct PosteriorSummary {
  Vector mean;
  Matrix cov;
};

/// Relative slack used for budget feasibility so that sums of representable costs
/// such as 10 x 0.1 still fit a budget of 1.
inline constexpr double kBudgetSlack = 1e-12;

/// True when k_cheap cheap and k_exp expensive sensors fit within the budget.
bool fits_budget(std::size_t k_cheap, std::size_t k_exp, const FidelityClass& cheap,
                 const FidelityClass& exp, double budget);

double spend(std::size_t k_cheap, std::size_t k_exp, const FidelityClass& cheap,
             const FidelityClass& exp);

/// B(S) = I + (A_ch S_ch)(A_ch S_ch)^T + (A_exp S_exp)(A_exp S_exp)^T.
Matrix information_matrix(const ProblemInstance& inst, const Selection& sel);

/// Log-determinant of an SPD matrix via Cholesky. Throws NumericalBreakdown when the
/// factorization reports a non-positive pivot.
double spd_log_det(const Matrix& m);

/// D-optimality objective log det B(S). Natural log.
double phi_d(const ProblemInstance& inst, const Selection& sel);

/// Quadratic forms in [-1e-12, 0) are roundoff and clamp to zero.
inline constexpr double kQuadFormFloor = -1e-12;

/// log(1 + a^T B^{-1} a) given b_inv_col = B^{-1} a.
double marginal_gain(const Eigen::Ref<const Vector>& b_inv_col,
                     const Eigen::Ref<const Vector>& a_col);

/// Posterior of the reduced coordinates given measurements `y`.
///
/// `psi` is the M x l candidate restriction of the basis and `prior_var` the
/// diagonal of Sigma_pr. Measurements are ordered cheap sensors first, then
/// expensive, each in ascending location order. Indices refer to rows of `psi`.
PosteriorSummary posterior(const Matrix& psi, const Vector& prior_var, const FidelityClass& cheap,
                           const FidelityClass& exp, const Selection& sel, const Vector& y);

}  // namespace mfsp
