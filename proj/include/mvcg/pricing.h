///////////////////////////////////////////////////////////////////////////////
//
// Indifference prices of the forward contract and the agreement quantity.
//
// Payoffs are affine in F, so each player's indifference price follows from
// two equilibrium solves with F = 0:
//
//   F_p(lambda) = J_p*(0,0) - J_p*(lambda,0),  F_c(lambda) = J_c*(lambda,0) - J_c*(0,0)
//
// The agreement quantity lambda* > 0 is a root of g = F_c - F_p.
//
///////////////////////////////////////////////////////////////////////////////

#ifndef MVCG_PRICING_H
#define MVCG_PRICING_H

#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mvcg/equilibrium.h"
#include "mvcg/model.h"

namespace mvcg {

// BlowUp or A2Violation raised while solving at a given contract size.
class SolveFailure : public std::runtime_error {
 public:
  SolveFailure(std::string kind, double lambda, const std::string& what);
  const std::string& kind() const { return kind_; }
  double lambda() const { return lambda_; }

 private:
  std::string kind_;
  double lambda_;
};

struct Bracket {
  double lo = 1e-3;
  double hi = 50.0;
};

class NoSignChange : public std::runtime_error {
 public:
  NoSignChange(Bracket b, double g_lo, double g_hi);
  Bracket bracket() const { return bracket_; }
  double g_lo() const { return g_lo_; }
  double g_hi() const { return g_hi_; }

 private:
  Bracket bracket_;
  double g_lo_, g_hi_;
};

struct IndifferencePrices {
  double lambda = 0.0;
  double F_p = 0.0;
  double F_c = 0.0;
  double g() const { return F_c - F_p; }
};

// Solves once at lambda = 0 and reuses that baseline for every lambda.
class PricingContext {
 public:
  explicit PricingContext(const ValidatedParams& p, SolverSettings settings = {});

  const ValidatedParams& params() const { return params_; }
  const SolverSettings& settings() const { return settings_; }
  const EquilibriumReport& baseline() const { return baseline_; }

  // Equilibrium at (lambda, F). Throws SolveFailure.
  EquilibriumReport solve(double lambda, double F = 0.0) const;

  IndifferencePrices prices(double lambda) const;
  IndifferencePrices prices(const EquilibriumReport& at_lambda) const;

 private:
  ValidatedParams params_;
  SolverSettings settings_;
  EquilibriumReport baseline_;
};

IndifferencePrices indifference_prices(const ValidatedParams& p, double lambda,
                                       const SolverSettings& settings = {});

struct AgreementResult {
  double lambda_star = 0.0;
  double F_star = 0.0;       // F_p at lambda_star
  double F_c_star = 0.0;     // F_c at lambda_star
  double unit_price = 0.0;   // F_star / lambda_star
  double expected_spot_T = 0.0;            // under the lambda_star equilibrium
  double expected_spot_T_no_contract = 0.0;
  double risk_premium = 0.0;  // unit_price - expected_spot_T
  double residual = 0.0;      // |F_c - F_p| at lambda_star
  double tolerance = 0.0;
  Bracket bracket_used;
  bool degenerate = false;    // g vanishes on every scan point
  std::vector<std::pair<double, double>> sign_changes;
  std::vector<std::string> warnings;
};

// 64-point geometric sign scan on [lo, hi], then bisection. Throws
// NoSignChange, SolveFailure, std::invalid_argument for a bad bracket.
AgreementResult find_lambda_star(const PricingContext& ctx, Bracket search = {});
AgreementResult find_lambda_star(const ValidatedParams& p, Bracket search = {},
                                 const SolverSettings& settings = {});

// 2 h_1(0) q0 + 2 h_2(0) c0 + R_c(0) + R_p(0); equal at lambda = 0 and at
// the agreement quantity.
double agreement_invariant(const ValidatedParams& p, const EquilibriumReport& r);

struct PremiumRow {
  double eta_p, eta_c, l_p, l_c;
  double lambda_star, F_star, unit_price, expected_spot_T, premium;
};

PremiumRow risk_premium_report(const AgreementResult& res, const ValidatedParams& p);

std::string premium_csv_header();
std::string premium_csv_row(const PremiumRow& row);
void write_agreement_text(std::ostream& out, const AgreementResult& res);

}  // namespace mvcg

#endif  // MVCG_PRICING_H
