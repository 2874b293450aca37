///////////////////////////////////////////////////////////////////////////////
//
// Model primitives for the producer/consumer commodity game.
//
// The producer controls the drift u and volatility z of the production rate
// q, the consumer controls drift v and volatility y of the consumption rate
// c, and the spot price is S = s0 - rho_p q + gamma rho_c c. Both players
// penalise the integrated variance of lambda S (their forward position).
//
// The LQ structure yields four scalar Riccati functions with tanh closed
// forms (K_p, K_c with the risk-aversion term, Lambda_p, Lambda_c without)
// and the constant / time-dependent 2x2 coefficients feeding the matrix
// Riccati system solved in riccati.h.
//
///////////////////////////////////////////////////////////////////////////////

#ifndef MVCG_MODEL_H
#define MVCG_MODEL_H

#include <Eigen/Core>

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mvcg {

struct ModelParams {
  double T = 0.0;        // horizon (years)
  double k_p = 0.0;      // drift-control cost weights
  double k_c = 0.0;
  double l_p = 0.0;      // volatility-control cost weights
  double l_c = 0.0;
  double sigma_p = 0.0;  // nominal volatilities
  double sigma_c = 0.0;
  double eta_p = 0.0;    // risk aversions
  double eta_c = 0.0;
  double rho_p = 0.0;    // price-impact slopes
  double rho_c = 0.0;
  double gamma = 0.0;    // transformation ratio
  double delta = 0.0;    // transformation cost
  double p0 = 0.0;       // retail price intercept / slope
  double p1 = 0.0;
  double s0 = 0.0;       // spot price intercept
  double q0 = 0.0;       // initial production / consumption rates
  double c0 = 0.0;
  double lambda = 0.0;   // contract quantity
  double F = 0.0;        // forward cash amount
};

// Named access to every ModelParams field. Used by the config reader, the
// sweep layer and CLI overrides.
struct ParamField {
  std::string_view name;
  double ModelParams::*member;
};

const std::array<ParamField, 20>& param_fields();

// Returns nullptr when `name` is not a field of ModelParams.
const ParamField* find_param_field(std::string_view name);

// The reference market: symmetric players with rho_p = gamma
// rho_c = 0.5, p0 = 2 s0 + gamma delta, p1 = gamma - 1. The risk aversions
// and volatility costs are not fixed there; this sets eta = 0.01, l = 5.
ModelParams reference_params();

// Exchange producer and consumer roles. Under the reference parametrisation
// (rho_p = gamma rho_c, p1 = gamma - 1, p0 = 2 s0 + gamma delta) this maps
// the game onto itself with q and c exchanged.
ModelParams swap_roles(const ModelParams& p);

struct Violation {
  std::string field;
  std::string reason;
};

class ConstraintViolation : public std::invalid_argument {
 public:
  explicit ConstraintViolation(std::vector<Violation> violations);

  const std::string& field() const { return violations_.front().field; }
  const std::string& reason() const { return violations_.front().reason; }
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// Parameters that passed validate_params. Immutable.
class ValidatedParams {
 public:
  const ModelParams& get() const { return params_; }
  const ModelParams* operator->() const { return &params_; }

  // Copy with the contract terms replaced. The contract does not enter any
  // validity constraint, so the result stays certified.
  ValidatedParams with_contract(double lambda, double F) const;

 private:
  friend ValidatedParams validate_params(const ModelParams& p);
  explicit ValidatedParams(const ModelParams& p) : params_(p) {}

  ModelParams params_;
};

// Throws ConstraintViolation listing every failed invariant.
ValidatedParams validate_params(const ModelParams& p);

enum class RiccatiKind { kKp, kKc, kLambdaP, kLambdaC };

// The tanh closed forms: -(k/2) r tanh(r (T - t)) with r = sqrt(2 a / k),
// where a is the state-penalty rate of the scalar Riccati equation
// K' = -(2/k) K^2 + a, K(T) = 0.
double closed_form_K(const ValidatedParams& p, double t, RiccatiKind which);

// Analytic time derivative of closed_form_K.
double closed_form_K_derivative(const ValidatedParams& p, double t,
                                RiccatiKind which);

// Rate `a` and cost weight `k` of the scalar Riccati equation behind `which`.
double riccati_rate(const ModelParams& p, RiccatiKind which);
double riccati_cost(const ModelParams& p, RiccatiKind which);

// Derived coefficients of the equilibrium Riccati system. Time-dependent
// pieces are evaluated lazily so integrators can query stage points.
class CoefficientSet {
 public:
  Eigen::Matrix2d Xi;
  Eigen::Matrix2d Xi_hat;
  Eigen::Matrix2d R_mat;
  Eigen::Vector2d Psi;

  double Kp(double t) const;
  double Kc(double t) const;
  double Lp_fun(double t) const;
  double Lc_fun(double t) const;

  double Kp_derivative(double t) const;
  double Kc_derivative(double t) const;

  // diag(-(2/k_p) K_p(t), -(2/k_c) K_c(t))
  Eigen::Matrix2d Phi(double t) const;
  // diag(-(2/k_p) Lambda_p(t), -(2/k_c) Lambda_c(t))
  Eigen::Matrix2d Phi_hat(double t) const;

  const ValidatedParams& params() const { return params_; }

 private:
  friend CoefficientSet build_coefficients(const ValidatedParams& p);
  explicit CoefficientSet(const ValidatedParams& p) : params_(p) {}

  ValidatedParams params_;
};

CoefficientSet build_coefficients(const ValidatedParams& p);

}  // namespace mvcg

#endif  // MVCG_MODEL_H
