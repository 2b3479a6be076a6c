#include "support.hpp"

#include "mfsp/errors.hpp"
#include "mfsp/model.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mfsp;
using mfsp::testing::dense_phi_d;
using mfsp::testing::random_problem;

namespace {

ProblemInstance unit_instance() {
  Matrix f(2, 3);
  f << 1, 0, 1,
       0, 1, 1;
  return ProblemInstance::from_shared(f, {1.0, 1.0}, {2.0, 0.5}, 10.0);
}

}  // namespace

TEST(Budget, RepresentationErrorStillFits) {
  EXPECT_TRUE(fits_budget(10, 0, {0.1, 1.0}, {0.3, 0.5}, 1.0));
  EXPECT_FALSE(fits_budget(11, 0, {0.1, 1.0}, {0.3, 0.5}, 1.0));
  EXPECT_TRUE(fits_budget(1, 1, {1.0, 1.0}, {2.0, 0.5}, 3.0));
  EXPECT_FALSE(fits_budget(2, 1, {1.0, 1.0}, {2.0, 0.5}, 3.0));
  EXPECT_DOUBLE_EQ(spend(3, 2, {1.5, 1.0}, {4.0, 0.5}), 12.5);
}

TEST(PhiD, EmptySelectionIsZero) {
  EXPECT_EQ(phi_d(unit_instance(), {}), 0.0);
}

TEST(PhiD, SingleSensorClosedForm) {
  const auto inst = unit_instance();
  // column 2 of the shared factor is (1, 1); expensive scaling is 1 / 0.5.
  EXPECT_NEAR(phi_d(inst, {{2}, {}}), std::log(3.0), 1e-14);
  EXPECT_NEAR(phi_d(inst, {{}, {2}}), std::log(1.0 + 8.0), 1e-14);
}

TEST(PhiD, OrthogonalSensorsAdd) {
  const auto inst = unit_instance();
  EXPECT_NEAR(phi_d(inst, {{0, 1}, {}}), 2.0 * std::log(2.0), 1e-14);
}

TEST(PhiD, OrderDoesNotChangeTheValue) {
  Rng rng(7);
  const auto p = random_problem(rng, 5, 12, 3, 6);
  const Selection a{{3, 1, 7}, {10, 0}};
  const Selection b{{7, 3, 1}, {0, 10}};
  EXPECT_EQ(phi_d(p.inst, a), phi_d(p.inst, b));
}

TEST(PhiD, MatchesDensePosteriorOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_problem(rng, 4, 9, 2, 6);
    const Selection sel{{0, 4, 5}, {2, 8}};
    EXPECT_NEAR(phi_d(p.inst, sel), dense_phi_d(p.psi, p.prior_var, p.inst.cheap, p.inst.exp, sel),
                1e-9);
  }
}

TEST(PhiD, RejectsInvalidSelections) {
  const auto inst = unit_instance();
  EXPECT_THROW(phi_d(inst, {{0}, {0}}), InvalidInput);
  EXPECT_THROW(phi_d(inst, {{0, 0}, {}}), InvalidInput);
  EXPECT_THROW(phi_d(inst, {{3}, {}}), InvalidInput);
}

TEST(LogDet, NonSpdBreaksDown) {
  Matrix m(2, 2);
  m << 1, 2,
       2, 1;
  EXPECT_THROW(spd_log_det(m), NumericalBreakdown);
  EXPECT_NEAR(spd_log_det(Matrix::Identity(3, 3) * 2.0), 3.0 * std::log(2.0), 1e-15);
}

TEST(MarginalGain, DeterminantLemma) {
  Rng rng(5);
  const auto p = random_problem(rng, 5, 10, 3, 6);
  const Selection base{{1, 2}, {6}};
  const Matrix b = information_matrix(p.inst, base);
  const Vector a = p.inst.a_exp.col(4);
  const Vector binv_a = b.llt().solve(a);
  Selection grown = base;
  grown.exp_idx.push_back(4);
  EXPECT_NEAR(marginal_gain(binv_a, a), phi_d(p.inst, grown) - phi_d(p.inst, base), 1e-12);
}

TEST(MarginalGain, RoundoffClampsAndRealNegativesThrow) {
  Vector a(1), d(1);
  a << 1.0;
  d << -1e-13;
  EXPECT_EQ(marginal_gain(d, a), 0.0);
  d << -1e-6;
  EXPECT_THROW(marginal_gain(d, a), NumericalBreakdown);
}

TEST(Validate, FidelityOrdering) {
  EXPECT_NO_THROW(validate_fidelities({1.0, 1.0}, {2.0, 0.5}));
  EXPECT_THROW(validate_fidelities({2.0, 1.0}, {2.0, 0.5}), InvalidInput);
  EXPECT_THROW(validate_fidelities({1.0, 0.5}, {2.0, 0.5}), InvalidInput);
  EXPECT_THROW(validate_fidelities({0.0, 1.0}, {2.0, 0.5}), InvalidInput);
}

TEST(Validate, MismatchedAMatrices) {
  auto inst = unit_instance();
  inst.a_exp(0, 0) += 1e-3;
  EXPECT_THROW(inst.validate(), InvalidInput);
  inst = unit_instance();
  inst.budget = -1.0;
  EXPECT_THROW(inst.validate(), InvalidInput);
}

TEST(Posterior, EmptySelectionGivesThePrior) {
  Matrix psi = Matrix::Random(6, 3);
  Vector pv(3);
  pv << 2.0, 1.0, 0.5;
  const auto post = posterior(psi, pv, {1, 1}, {2, 0.5}, {}, Vector());
  EXPECT_TRUE(post.mean.isZero(0.0));
  EXPECT_TRUE(post.cov.isApprox(Matrix(pv.asDiagonal()), 1e-15));
}

TEST(Posterior, MatchesDenseGaussianUpdate) {
  Rng rng(3);
  const auto p = random_problem(rng, 3, 8, 2, 6);
  const Selection sel{{5, 1}, {3}};
  Vector y(3);
  y << 0.3, -1.2, 0.7;
  const auto post = posterior(p.psi, p.prior_var, p.inst.cheap, p.inst.exp, sel, y);

  // cheap ascending (1, 5), then expensive (3)
  Matrix h(3, 3);
  h.row(0) = p.psi.row(1);
  h.row(1) = p.psi.row(5);
  h.row(2) = p.psi.row(3);
  Vector noise(3);
  noise << p.inst.cheap.sigma, p.inst.cheap.sigma, p.inst.exp.sigma;
  const Matrix gn_inv = noise.array().square().inverse().matrix().asDiagonal();
  const Matrix cov = (Matrix(p.prior_var.cwiseInverse().asDiagonal()) + h.transpose() * gn_inv * h).inverse();
  const Vector mean = cov * h.transpose() * gn_inv * y;
  EXPECT_TRUE(post.cov.isApprox(cov, 1e-10));
  EXPECT_TRUE(post.mean.isApprox(mean, 1e-10));
}
