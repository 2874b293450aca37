#include "mvcg/riccati.h"

#include <gtest/gtest.h>

#include <cmath>

namespace mvcg {
namespace {

using Eigen::Matrix2d;

ModelParams params(double lambda, double eta_p = 0.01, double eta_c = 0.01) {
  ModelParams p = reference_params();
  p.lambda = lambda;
  p.eta_p = eta_p;
  p.eta_c = eta_c;
  return p;
}

CoefficientSet coeffs(const ModelParams& p) { return build_coefficients(validate_params(p)); }

const TimeGrid kGrid(1.0, 2000);

double max_diff(const MatrixFunction& a, const MatrixFunction& b) {
  double m = 0.0;
  for (int i = 0; i < a.grid().size(); ++i)
    m = std::max(m, (a.at(i) - b.at(i)).cwiseAbs().maxCoeff());
  return m;
}

TEST(ScalarRiccati, Rk4MatchesClosedForm) {
  for (double lambda : {0.0, 1.0, 5.0}) {
    const ValidatedParams vp = validate_params(params(lambda));
    const ScalarFunction K = solve_scalar_riccati(vp, RiccatiKind::kKp, kGrid);
    double err = 0.0;
    for (int i = 0; i < kGrid.size(); ++i)
      err = std::max(err, std::abs(K.at(i) - closed_form_K(vp, kGrid.node(i), RiccatiKind::kKp)));
    EXPECT_LE(err, 1e-8) << "lambda " << lambda;
  }
}

TEST(Pi, MatchesIndependentHighOrderSolve) {
  // Reference values from an adaptive 8th-order solve at rtol 1e-13.
  const MatrixFunction pi = solve_pi(coeffs(params(1.0, 0.05, 0.01)), kGrid);
  EXPECT_NEAR(pi.at(0)(0, 0), 0.007000404512017, 1e-12);
  EXPECT_NEAR(pi.at(0)(0, 1), 0.231143429920771, 1e-12);
  EXPECT_NEAR(pi.at(0)(1, 0), 0.222337965923789, 1e-12);
  EXPECT_NEAR(pi.at(0)(1, 1), 0.007010730978084, 1e-12);

  const CoefficientSet c = coeffs(params(1.0));
  const MatrixFunction ph = solve_pi_hat(c, kGrid);
  const VectorFunction h = solve_h(c, ph, kGrid);
  EXPECT_NEAR(ph.at(0)(0, 1), 0.220519282231849, 1e-12);
  EXPECT_NEAR(h.at(0)(0), 24.436703815951468, 1e-10);
  EXPECT_NEAR(h.at(0)(1), 24.436703815951468, 1e-10);
}

TEST(Pi, TerminalValuesExact) {
  const CoefficientSet c = coeffs(params(2.0));
  const MatrixFunction pi = solve_pi(c, kGrid);
  const MatrixFunction ph = solve_pi_hat(c, kGrid);
  const VectorFunction h = solve_h(c, ph, kGrid);
  EXPECT_EQ(pi.at(2000), Matrix2d::Zero());
  EXPECT_EQ(ph.at(2000), Matrix2d::Zero());
  EXPECT_EQ(h.at(2000)(0), 0.5 * 2.0 * 0.5);
  EXPECT_EQ(h.at(2000)(1), 0.5 * 2.0 * (1.2 * (0.5 / 1.2)));
}

TEST(Pi, EqualsPiHatWithoutContract) {
  const CoefficientSet c = coeffs(params(0.0));
  EXPECT_EQ(max_diff(solve_pi(c, kGrid), solve_pi_hat(c, kGrid)), 0.0);
}

TEST(Pi, PiHatIgnoresRiskAversionAndContract) {
  const MatrixFunction a = solve_pi_hat(coeffs(params(0.0, 0.01, 0.01)), kGrid);
  const MatrixFunction b = solve_pi_hat(coeffs(params(3.0, 0.08, 0.002)), kGrid);
  EXPECT_LE(max_diff(a, b), 1e-12);
}

TEST(Pi, ZeroProducerImpactDecouples) {
  ModelParams p = params(1.0);
  p.rho_p = 0.0;
  const CoefficientSet c = coeffs(p);
  const MatrixFunction pi = solve_pi(c, kGrid);
  const MatrixFunction ph = solve_pi_hat(c, kGrid);
  for (int i = 0; i < kGrid.size(); ++i) {
    EXPECT_LE(std::abs(pi.at(i)(0, 0)), 1e-9);
    EXPECT_LE(std::abs(pi.at(i)(1, 0)), 1e-9);
    EXPECT_LE(std::abs(pi.at(i)(1, 1)), 1e-9);
    EXPECT_LE(std::abs(ph.at(i)(0, 0)), 1e-9);
    EXPECT_LE(std::abs(ph.at(i)(1, 0)), 1e-9);
  }
  EXPECT_GT(std::abs(pi.at(0)(0, 1)), 1e-3);
}

TEST(Pi, OdeResidualSmall) {
  const CoefficientSet c = coeffs(params(1.0, 0.05, 0.01));
  const MatrixFunction pi = solve_pi(c, kGrid);
  const double h = kGrid.step();
  double worst = 0.0;
  for (int i = 1; i < kGrid.n_steps(); ++i) {
    const double t = kGrid.node(i);
    const Matrix2d d = (pi.at(i + 1) - pi.at(i - 1)) / (2 * h);
    const Matrix2d phi = c.Phi(t);
    const Matrix2d& P = pi.at(i);
    const Matrix2d rhs = c.Xi + phi * P + P * phi + P * c.R_mat * P;
    worst = std::max(worst, (d - rhs).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Pi, GridConvergence) {
  for (double lambda : {0.0, 1.0, 5.0}) {
    const CoefficientSet c = coeffs(params(lambda));
    const Matrix2d a = solve_pi(c, kGrid).at(0);
    const Matrix2d b = solve_pi(c, TimeGrid(1.0, 4000)).at(0);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-8) << lambda;
  }
}

TEST(Pi, SymmetricPlayersGiveSymmetricSolution) {
  const CoefficientSet c = coeffs(params(1.5));
  const RiccatiSolution r = solve_riccati(c, kGrid);
  for (int i = 0; i < kGrid.size(); ++i) {
    EXPECT_NEAR(r.pi.at(i)(0, 0), r.pi.at(i)(1, 1), 1e-10);
    EXPECT_NEAR(r.pi.at(i)(0, 1), r.pi.at(i)(1, 0), 1e-10);
    EXPECT_NEAR(r.pi_hat.at(i)(0, 0), r.pi_hat.at(i)(1, 1), 1e-10);
    EXPECT_NEAR(r.pi_hat.at(i)(0, 1), r.pi_hat.at(i)(1, 0), 1e-10);
    EXPECT_NEAR(r.h.at(i)(0), r.h.at(i)(1), 1e-10);
  }
}

TEST(H, AffineInContract) {
  auto h_of = [](double lambda) {
    const CoefficientSet c = coeffs(params(lambda));
    return solve_h(c, solve_pi_hat(c, kGrid), kGrid);
  };
  const VectorFunction h0 = h_of(0.0), h1 = h_of(1.0), h2 = h_of(2.0);
  for (int i = 0; i < kGrid.size(); ++i) {
    const Eigen::Vector2d predicted = h0.at(i) + 2.0 * (h1.at(i) - h0.at(i));
    EXPECT_LT((h2.at(i) - predicted).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GE(h1.at(i)(0), h0.at(i)(0));
    EXPECT_GE(h1.at(i)(1), h0.at(i)(1));
  }
}

TEST(A2, ReferenceRegimeCertified) {
  const CoefficientSet c = coeffs(params(1.0));
  const A2Margins m = check_A2(c, solve_pi(c, kGrid));
  EXPECT_TRUE(m.certified);
  EXPECT_GT(m.min_p, 0.0);
  EXPECT_GT(m.min_c, 0.0);
}

TEST(A2, ZeroImpactLeavesFullMargin) {
  ModelParams p = params(1.0);
  p.rho_p = 0.0;
  const CoefficientSet c = coeffs(p);
  const A2Margins m = check_A2(c, solve_pi(c, kGrid));
  for (int i = 0; i < kGrid.size(); ++i) EXPECT_NEAR(m.margin_p.at(i), p.l_p, 1e-9);
}

TEST(A2, ZeroVolatilityCostFailsAtHorizon) {
  ModelParams p = params(0.0);
  p.l_p = 0.0;
  const CoefficientSet c = coeffs(p);
  const MatrixFunction pi = solve_pi(c, kGrid);
  const A2Margins m = a2_margins(c, pi);
  EXPECT_FALSE(m.certified);
  for (int i = 0; i < kGrid.n_steps(); ++i)
    EXPECT_NEAR(m.margin_p.at(i), -2.0 * (c.Kp(kGrid.node(i)) + pi.at(i)(0, 0)), 1e-15);
  try {
    check_A2(c, pi);
    FAIL() << "expected A2Violation";
  } catch (const A2Violation& e) {
    EXPECT_EQ(e.player(), Player::kProducer);
    EXPECT_EQ(e.time(), 1.0);
    EXPECT_EQ(e.margin(), 0.0);
  }
  EXPECT_FALSE(solve_riccati(c, kGrid).a2_certified);
}

}  // namespace
}  // namespace mvcg
