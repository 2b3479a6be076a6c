#pragma once

#include "mfsp/greedy.hpp"
#include "mfsp/model.hpp"
#include "mfsp/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace mfsp::testing {

// Random design problem together with the ingredients needed by the dense oracle.
struct RandomProblem {
  Matrix psi;       // M x l
  Vector prior_var; // l
  ProblemInstance inst;
};

inline RandomProblem random_problem(Rng& rng, Index l, Index m, FidelityClass cheap,
                                    FidelityClass exp, double budget) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  RandomProblem p;
  p.psi.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(l));
  for (Eigen::Index j = 0; j < p.psi.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.psi.rows(); ++i) p.psi(i, j) = normal(rng);
  }
  p.prior_var.resize(static_cast<Eigen::Index>(l));
  for (Eigen::Index i = 0; i < p.prior_var.size(); ++i) p.prior_var(i) = unif(rng);
  const Matrix factor = p.prior_var.cwiseSqrt().asDiagonal() * p.psi.transpose();
  p.inst = ProblemInstance::from_shared(factor, cheap, exp, budget);
  return p;
}

// Random costs and noise levels satisfying the fidelity ordering, and a budget
// admitting between `lo` and `hi` sensors.
inline RandomProblem random_problem(Rng& rng, Index l, Index m, std::size_t lo, std::size_t hi) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  FidelityClass cheap{0.5 + unif(rng), 0.5 + unif(rng)};
  FidelityClass exp{cheap.cost * (1.2 + 2.0 * unif(rng)), cheap.sigma * (0.2 + 0.7 * unif(rng))};
  std::uniform_int_distribution<std::size_t> count(lo, hi);
  const double budget = cheap.cost * static_cast<double>(count(rng)) + 1e-9;
  return random_problem(rng, l, m, cheap, exp, budget);
}

// log det Sigma_pr - log det Sigma_post from the unwhitened Bayesian posterior.
inline double dense_phi_d(const Matrix& psi, const Vector& prior_var, const FidelityClass& cheap,
                          const FidelityClass& exp, const Selection& sel) {
  const auto l = psi.cols();
  Matrix precision = prior_var.cwiseInverse().asDiagonal();
  for (Index i : sel.cheap_idx) {
    const Vector h = psi.row(static_cast<Eigen::Index>(i)).transpose();
    precision += h * h.transpose() / (cheap.sigma * cheap.sigma);
  }
  for (Index i : sel.exp_idx) {
    const Vector h = psi.row(static_cast<Eigen::Index>(i)).transpose();
    precision += h * h.transpose() / (exp.sigma * exp.sigma);
  }
  const Matrix post = precision.inverse();
  double log_prior = 0.0;
  for (Eigen::Index i = 0; i < l; ++i) log_prior += std::log(prior_var(i));
  return log_prior - std::log(post.determinant());
}

// Same objective through the generic LU determinant of B(S).
inline double lu_phi_d(const ProblemInstance& inst, const Selection& sel) {
  Matrix b = Matrix::Identity(inst.a_cheap.rows(), inst.a_cheap.rows());
  for (Index i : sel.cheap_idx) {
    const Vector a = inst.a_cheap.col(static_cast<Eigen::Index>(i));
    b += a * a.transpose();
  }
  for (Index i : sel.exp_idx) {
    const Vector a = inst.a_exp.col(static_cast<Eigen::Index>(i));
    b += a * a.transpose();
  }
  return std::log(b.fullPivLu().determinant());
}

// Plain greedy over (fidelity, location) pairs using lu_phi_d for every trial.
// Returns the picks in order.
struct Pick {
  Fidelity f;
  Index loc;
  friend bool operator==(const Pick&, const Pick&) = default;
};

inline std::vector<Pick> oracle_greedy(const ProblemInstance& inst) {
  std::vector<Pick> picks;
  Selection sel;
  std::vector<char> used(inst.locations(), 0);
  double current = 0.0;
  for (;;) {
    const std::size_t kc = sel.cheap_idx.size(), ke = sel.exp_idx.size();
    if (!fits_budget(kc + 1, ke, inst.cheap, inst.exp, inst.budget)) break;
    if (picks.size() == inst.locations()) break;
    double best = -1.0;
    Pick choice{Fidelity::cheap, 0};
    for (Fidelity f : kFidelities) {
      const bool cheap = f == Fidelity::cheap;
      if (!fits_budget(kc + (cheap ? 1 : 0), ke + (cheap ? 0 : 1), inst.cheap, inst.exp,
                       inst.budget)) {
        continue;
      }
      for (Index i = 0; i < inst.locations(); ++i) {
        if (used[i]) continue;
        Selection trial = sel;
        trial.indices(f).push_back(i);
        const double ratio = (lu_phi_d(inst, trial) - current) / inst.cost(f);
        if (best < 0.0 || strictly_better(ratio, best)) {
          best = ratio;
          choice = {f, i};
        }
      }
    }
    sel.indices(choice.f).push_back(choice.loc);
    used[choice.loc] = 1;
    current = lu_phi_d(inst, sel);
    picks.push_back(choice);
  }
  return picks;
}

inline std::vector<Pick> picks_of(const DesignResult& r) {
  std::vector<Pick> out;
  for (const auto& s : r.trace) out.push_back({s.fidelity, s.location});
  return out;
}

}  // namespace mfsp::testing
