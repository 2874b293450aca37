#include "mvcg/montecarlo.h"
#include "mvcg/philox.h"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace mvcg {
namespace {

TEST(Philox, KnownAnswers) {
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
            (PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                          {0xffffffff, 0xffffffff}),
            (PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                          {0xa4093822, 0x299f31d0}),
            (PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, NormalsHaveUnitMoments) {
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto z = normal_pair(3, i % 17, i);
    s += z[0] + z[1];
    s2 += z[0] * z[0] + z[1] * z[1];
  }
  EXPECT_NEAR(s / (2 * n), 0.0, 0.01);
  EXPECT_NEAR(s2 / (2 * n), 1.0, 0.01);
}

class McTest : public ::testing::Test {
 protected:
  static ValidatedParams params(double lambda, double F = 0.0) {
    ModelParams p = reference_params();
    p.eta_p = 0.05;
    p.lambda = lambda;
    p.F = F;
    return validate_params(p);
  }
  static SimConfig small(long paths = 3000) {
    SimConfig cfg;
    cfg.n_paths = paths;
    cfg.n_time_steps = 100;
    cfg.seed = 11;
    cfg.n_threads = 1;
    return cfg;
  }
};

TEST_F(McTest, BitReproducibleAcrossThreadCounts) {
  const ValidatedParams p = params(1.0);
  const EquilibriumReport eq = solve_equilibrium(p);
  SimConfig cfg = small(2500);
  const McEstimate a = simulate_equilibrium(eq, p, cfg);
  cfg.n_threads = 3;
  const McEstimate b = simulate_equilibrium(eq, p, cfg);
  EXPECT_EQ(a.J_p_hat, b.J_p_hat);
  EXPECT_EQ(a.J_c_hat, b.J_c_hat);
  EXPECT_EQ(a.se_p, b.se_p);
  EXPECT_EQ(a.int_var_S, b.int_var_S);
}

TEST_F(McTest, SeedChangesEstimate) {
  const ValidatedParams p = params(1.0);
  const EquilibriumReport eq = solve_equilibrium(p);
  SimConfig cfg = small();
  const McEstimate a = simulate_equilibrium(eq, p, cfg);
  cfg.seed = 12;
  const McEstimate b = simulate_equilibrium(eq, p, cfg);
  EXPECT_NE(a.J_p_hat, b.J_p_hat);
}

TEST_F(McTest, NoiseFreeMatchesSolver) {
  ModelParams m = reference_params();
  m.sigma_p = m.sigma_c = 0.0;
  const ValidatedParams p = validate_params(m);
  const EquilibriumReport eq = solve_equilibrium(p);
  SimConfig cfg;
  cfg.n_paths = 2;
  cfg.n_time_steps = 1000;
  const McEstimate mc = simulate_equilibrium(eq, p, cfg);
  EXPECT_NEAR(mc.J_p_hat, eq.J_p_star, 1e-6 * std::abs(eq.J_p_star));
  EXPECT_NEAR(mc.J_c_hat, eq.J_c_star, 1e-6 * std::abs(eq.J_c_star));
  EXPECT_EQ(mc.se_p, 0.0);
}

TEST_F(McTest, StandardErrorShrinksWithPaths) {
  const ValidatedParams p = params(1.0);
  const EquilibriumReport eq = solve_equilibrium(p);
  const McEstimate a = simulate_equilibrium(eq, p, small(4000));
  const McEstimate b = simulate_equilibrium(eq, p, small(8000));
  const double ratio = b.se_p / a.se_p;
  EXPECT_NEAR(ratio, 1.0 / std::sqrt(2.0), 0.1);
}

TEST_F(McTest, SpotVarianceIdentity) {
  const ValidatedParams p = params(1.0);
  const EquilibriumReport eq = solve_equilibrium(p);
  const McEstimate mc = simulate_equilibrium(eq, p, small());
  const double rp = p->rho_p, rc = p->gamma * p->rho_c;
  const double rhs = rp * rp * mc.int_var_q + rc * rc * mc.int_var_c -
                     2 * rp * rc * mc.int_cov_qc;
  EXPECT_NEAR(mc.int_var_S, rhs, 1e-10 * std::abs(rhs));
}

TEST_F(McTest, TermsAddUpToPayoff) {
  const ValidatedParams p = params(1.0, 40.0);
  const EquilibriumReport eq = solve_equilibrium(p);
  const McEstimate mc = simulate_equilibrium(eq, p, small());
  const TermBreakdown& t = mc.terms_p;
  EXPECT_NEAR(t.profit - t.drift_cost - t.volatility_cost + t.contract - t.variance_penalty,
              mc.J_p_hat, 1e-9 * std::abs(mc.J_p_hat));
}

TEST_F(McTest, ZeroDeviationIsExactlyZero) {
  const ValidatedParams p = params(1.0);
  const EquilibriumReport eq = solve_equilibrium(p);
  const auto rows = deviation_test(eq, p, small(),
                                   {{Deviation::Target::kOwnMean, 0.0},
                                    {Deviation::Target::kVolatility, 0.0}});
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.delta_J_p, 0.0);
    EXPECT_EQ(r.se, 0.0);
  }
}

TEST_F(McTest, DeviationThroughSimConfig) {
  const ValidatedParams p = params(1.0);
  const EquilibriumReport eq = solve_equilibrium(p);
  SimConfig cfg = small();
  cfg.deviation = Deviation{Deviation::Target::kVolatility, 0.2};
  const McEstimate mc = simulate_equilibrium(eq, p, cfg);
  ASSERT_TRUE(mc.delta_J_p.has_value());
  const auto rows = deviation_test(eq, p, small(), {*cfg.deviation});
  EXPECT_DOUBLE_EQ(*mc.delta_J_p, rows[0].delta_J_p);
  EXPECT_LT(*mc.delta_J_p, 0.0);
}

TEST_F(McTest, MomentChecksAtQuarterHalfAndEnd) {
  const ValidatedParams p = params(1.0);
  const EquilibriumReport eq = solve_equilibrium(p);
  const McEstimate mc = simulate_equilibrium(eq, p, small());
  ASSERT_EQ(mc.moment_checks.size(), 15u);
  EXPECT_DOUBLE_EQ(mc.moment_checks.front().t, 0.25);
  EXPECT_DOUBLE_EQ(mc.moment_checks.back().t, 1.0);
  const auto bands = acceptance_bands(mc, eq);
  EXPECT_EQ(bands.size(), 17u);
}

TEST_F(McTest, BandWithZeroStandardError) {
  EXPECT_TRUE((BandCheck{"x", 1.0, 1.0 + 1e-12, 0.0, 3.0}.pass()));
  EXPECT_FALSE((BandCheck{"x", 1.0, 1.1, 0.0, 3.0}.pass()));
  EXPECT_TRUE((BandCheck{"x", 1.0, 1.1, 0.05, 3.0}.pass()));
}

TEST_F(McTest, ConfigValidation) {
  const TimeGrid grid(1.0, 2000);
  SimConfig cfg = small();
  EXPECT_NO_THROW(validate_sim_config(cfg, grid));
  cfg.n_paths = 1;
  EXPECT_THROW(validate_sim_config(cfg, grid), std::invalid_argument);
  cfg = small();
  cfg.n_time_steps = 300;
  EXPECT_THROW(validate_sim_config(cfg, grid), std::invalid_argument);
  cfg.n_time_steps = 0;
  EXPECT_THROW(validate_sim_config(cfg, grid), std::invalid_argument);
}

TEST(DeviationTarget, ParseNames) {
  EXPECT_EQ(parse_target("own_mean"), Deviation::Target::kOwnMean);
  EXPECT_EQ(parse_target("qbar_gain"), Deviation::Target::kOwnMean);
  EXPECT_EQ(parse_target("z"), Deviation::Target::kVolatility);
  EXPECT_STREQ(target_name(Deviation::Target::kConstant), "constant");
  EXPECT_THROW(parse_target("foo"), std::invalid_argument);
}

TEST_F(McTest, Output) {
  const ValidatedParams p = params(1.0);
  const EquilibriumReport eq = solve_equilibrium(p);
  SimConfig cfg = small(100);
  const McEstimate mc = simulate_equilibrium(eq, p, cfg);
  std::ostringstream text, csv;
  write_estimate_text(text, mc);
  write_estimate_csv(csv, mc);
  EXPECT_NE(text.str().find("J_p_hat"), std::string::npos);
  EXPECT_FALSE(csv.str().empty());
}

}  // namespace
}  // namespace mvcg
