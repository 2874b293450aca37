#include "mvcg/equilibrium.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mvcg {
namespace {

ModelParams params(double lambda, double eta_p = 0.01, double eta_c = 0.01) {
  ModelParams p = reference_params();
  p.lambda = lambda;
  p.eta_p = eta_p;
  p.eta_c = eta_c;
  return p;
}

EquilibriumReport solve(const ModelParams& p, int n = 2000) {
  return solve_equilibrium(validate_params(p), {n});
}

TEST(Equilibrium, MatchesIndependentImplementation) {
  // Independent implementation: half-step Riccati grid, RK4 moments, Simpson.
  const EquilibriumReport r0 = solve(params(0.0));
  EXPECT_NEAR(r0.J_p_star, 4978.902291845903, 1e-7);
  EXPECT_NEAR(r0.J_c_star, 4978.902291845903, 1e-7);
  const EquilibriumReport r1 = solve(params(1.0));
  EXPECT_NEAR(r1.J_p_star, 4931.100421821699, 1e-7);
  EXPECT_NEAR(r1.J_c_star, 5031.100421821699, 1e-7);
  EXPECT_NEAR(r1.R_p0, 492.163885005436, 1e-8);
  EXPECT_NEAR(r1.h1_0, 24.436703815951468, 1e-10);
  EXPECT_NEAR(r1.expected_spot_T, 50.0, 1e-10);
}

TEST(Policy, VolatilityControlsEqualNominalAtHorizon) {
  const EquilibriumReport r = solve(params(1.0, 0.05, 0.01));
  const int n = r.policy->grid().n_steps();
  EXPECT_EQ(r.policy->z_star().at(n), 10.0);
  EXPECT_EQ(r.policy->y_star().at(n), 10.0);
  for (int i = 0; i <= n; ++i) {
    EXPECT_GT(r.policy->z_star().at(i), 0.0);
    EXPECT_LE(r.policy->z_star().at(i), 10.0);
  }
}

TEST(Policy, GainsFollowRiccatiSolution) {
  const EquilibriumReport r = solve(params(1.0, 0.05, 0.01));
  const FeedbackPolicy& pol = *r.policy;
  const RiccatiSolution& ric = pol.riccati();
  const CoefficientSet& c = pol.coefficients();
  const int i = 700;
  const double t = pol.grid().node(i);
  const PlayerGains g = pol.producer(t);
  EXPECT_NEAR(g.own_dev, 0.4 * (c.Kp(t) + ric.pi.at(i)(0, 0)), 1e-14);
  EXPECT_NEAR(g.other_dev, 0.4 * ric.pi.at(i)(0, 1), 1e-14);
  EXPECT_NEAR(g.own_mean, 0.4 * (c.Lp_fun(t) + ric.pi_hat.at(i)(0, 0)), 1e-14);
  EXPECT_NEAR(g.other_mean, 0.4 * ric.pi_hat.at(i)(0, 1), 1e-14);
  EXPECT_NEAR(g.constant, 0.4 * ric.h.at(i)(0), 1e-13);
  const PlayerGains gc = pol.consumer(t);
  EXPECT_NEAR(gc.own_dev, 0.4 * (c.Kc(t) + ric.pi.at(i)(1, 1)), 1e-14);
  EXPECT_NEAR(gc.other_dev, 0.4 * ric.pi.at(i)(1, 0), 1e-14);
}

TEST(Policy, ProducerKeepsNominalVolatilityWithoutImpact) {
  ModelParams p = params(1.0);
  p.rho_p = 0.0;
  const EquilibriumReport r = solve(p);
  for (double z : r.policy->z_star().values()) EXPECT_NEAR(z, p.sigma_p, 1e-9);
}

TEST(Policy, HigherRiskAversionLowersVolatility) {
  auto min_z = [](double eta) {
    const EquilibriumReport r = solve(params(1.0, eta, eta));
    const auto& v = r.policy->z_star().values();
    return *std::min_element(v.begin(), v.end());
  };
  EXPECT_LT(min_z(0.05), min_z(0.01));
}

TEST(Policy, RequiresCertifiedSolution) {
  ModelParams p = params(0.0);
  p.l_p = 0.0;
  const CoefficientSet c = build_coefficients(validate_params(p));
  auto ric = std::make_shared<RiccatiSolution>(solve_riccati(c, TimeGrid(1.0, 200)));
  EXPECT_THROW(build_policy(c, ric), RequiresCertifiedSolution);
  EXPECT_THROW(solve(p), A2Violation);
}

TEST(Policy, VolatilityIndependentOfInitialState) {
  ModelParams a = params(1.0, 0.05, 0.01), b = a;
  b.q0 = 40.0;
  b.c0 = 170.0;
  b.s0 = 80.0;
  b.p0 = 2 * b.s0 + b.gamma * b.delta;
  const EquilibriumReport ra = solve(a), rb = solve(b);
  EXPECT_EQ(ra.policy->z_star().values(), rb.policy->z_star().values());
  EXPECT_EQ(ra.policy->y_star().values(), rb.policy->y_star().values());
}

TEST(Moments, DeterministicStart) {
  const EquilibriumReport r = solve(params(1.0));
  const MomentTrajectory& m = *r.moments;
  EXPECT_EQ(m.qbar(0), 100.0);
  EXPECT_EQ(m.cbar(0), 100.0);
  EXPECT_EQ(m.eq2(0), 1e4);
  EXPECT_EQ(m.ec2(0), 1e4);
  EXPECT_EQ(m.eqc(0), 1e4);
}

TEST(Moments, SymmetricMeansCoincide) {
  const auto keepm = solve(params(0.0));
  const MomentTrajectory& m = *keepm.moments;
  for (int i = 0; i < m.grid().size(); ++i) EXPECT_NEAR(m.qbar(i), m.cbar(i), 1e-9);
}

TEST(Moments, NoNoiseNoVariance) {
  ModelParams p = params(1.0);
  p.sigma_p = p.sigma_c = 0.0;
  const auto keepm = solve(p);
  const MomentTrajectory& m = *keepm.moments;
  for (int i = 0; i < m.grid().size(); ++i) {
    EXPECT_NEAR(m.var_q[i], 0.0, 1e-9);
    EXPECT_NEAR(m.var_c[i], 0.0, 1e-9);
  }
}

TEST(Moments, MeansIncreaseWithContract) {
  const auto keepa = solve(params(0.0));
  const MomentTrajectory& a = *keepa.moments;
  const auto keepb = solve(params(1.0));
  const MomentTrajectory& b = *keepb.moments;
  for (int i = 0; i < a.grid().size(); ++i) {
    EXPECT_GE(b.qbar(i), a.qbar(i));
    EXPECT_GE(b.cbar(i), a.cbar(i));
  }
}

TEST(Moments, VariancesNonNegativeAndCauchySchwarz) {
  const auto keepm = solve(params(2.0, 0.05, 0.01));
  const MomentTrajectory& m = *keepm.moments;
  for (int i = 0; i < m.grid().size(); ++i) {
    EXPECT_GE(m.var_q[i], 0.0);
    EXPECT_GE(m.var_c[i], 0.0);
    EXPECT_LE(m.cov_qc[i] * m.cov_qc[i], m.var_q[i] * m.var_c[i] * (1 + 1e-12));
  }
}

TEST(Moments, EqualMarketPowerSpotIgnoresContract) {
  const auto keepa = solve(params(0.0));
  const MomentTrajectory& a = *keepa.moments;
  const auto keepb = solve(params(3.0));
  const MomentTrajectory& b = *keepb.moments;
  for (int i = 0; i < a.grid().size(); ++i)
    EXPECT_NEAR(a.expected_spot[i], b.expected_spot[i], 1e-8);
}

TEST(Crosscheck, BackwardAdjointOdeAgreesWithAnsatz) {
  for (double lambda : {0.0, 1.0}) {
    const EquilibriumReport r = solve(params(lambda, 0.05, 0.01));
    const YsqCrosscheck c = crosscheck_Ysq_backward(*r.moments, *r.policy);
    EXPECT_LT(c.max_residual(), 1e-6) << lambda;
  }
}

TEST(Crosscheck, NoNoiseNoContract) {
  ModelParams p = params(0.0);
  p.sigma_p = p.sigma_c = 0.0;
  const EquilibriumReport r = solve(p);
  const YsqCrosscheck c = crosscheck_Ysq_backward(*r.moments, *r.policy);
  EXPECT_EQ(c.eyp2.at(r.moments->grid().n_steps()), 0.0);
  EXPECT_LT(c.max_residual(), 1e-6);
}

TEST(R, SymmetricPlayersShareR) {
  for (double lambda : {0.0, 0.7, 4.0}) {
    const EquilibriumReport r = solve(params(lambda));
    EXPECT_NEAR(r.R_p0, r.R_c0, 1e-8);
  }
}

TEST(R, AgreesWithExtrapolatedTrapezoid) {
  const EquilibriumReport coarse = solve(params(1.0));
  const EquilibriumReport fine = solve(params(1.0), 8000);
  const ModelParams p = params(1.0);
  const MomentTrajectory& m = *fine.moments;
  const FeedbackPolicy& pol = *fine.policy;
  const double gr = p.gamma * p.rho_c;
  std::vector<double> f(m.grid().size());
  for (int i = 0; i < m.grid().size(); ++i) {
    const double t = m.grid().node(i);
    const double pi11 = pol.riccati().pi.at(i)(0, 0);
    const double a = pi11 * pol.z_star().at(i) + 0.5 * p.l_p * p.sigma_p;
    f[i] = 2.0 / p.k_p * m.eyp2[i] - p.eta_p * gr * gr * m.var_c[i] +
           2.0 * a * a / (p.l_p - 2.0 * pol.coefficients().Kp(t));
  }
  std::vector<double> half;
  for (size_t i = 0; i < f.size(); i += 2) half.push_back(f[i]);
  const TimeGrid half_grid(1.0, m.grid().n_steps() / 2);
  const double integral = (4.0 * trapezoid(m.grid(), f) - trapezoid(half_grid, half)) / 3.0;
  const double R = integral - gr * m.cbar(m.grid().n_steps());
  EXPECT_NEAR(coarse.R_p0, R, 1e-6);
}

TEST(R, OddGridRejected) {
  EXPECT_THROW(solve(params(1.0), 2001), GridParity);
}

TEST(Payoffs, AffineInForwardAmount) {
  ModelParams p = params(1.0);
  const EquilibriumReport a = solve(p);
  p.F = 100.0;
  const EquilibriumReport b = solve(p);
  EXPECT_NEAR(b.J_p_star - a.J_p_star, 100.0, 1e-9);
  EXPECT_NEAR(b.J_c_star - a.J_c_star, -100.0, 1e-9);
}

TEST(Payoffs, SymmetricWithoutContract) {
  const EquilibriumReport r = solve(params(0.0));
  EXPECT_NEAR(r.J_p_star, r.J_c_star, 1e-8);
}

TEST(Output, CsvAndText) {
  const EquilibriumReport r = solve(params(1.0), 20);
  const std::string header = report_csv_header(), row = report_csv_row(r);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','),
            std::count(row.begin(), row.end(), ','));
  std::ostringstream text, csv;
  write_report_text(text, r);
  EXPECT_NE(text.str().find("J_p_star"), std::string::npos);
  write_moments_csv(csv, r);
  const std::string s = csv.str();
  EXPECT_EQ(s.rfind("t,qbar,cbar,Eq2,Ec2,Eqc,ES,zstar,ystar", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 22);
}

}  // namespace
}  // namespace mvcg
