#include "mvcg/model.h"

#include <cmath>
#include <sstream>
#include <utility>

namespace mvcg {

namespace {

#define MVCG_FIELD(name) ParamField{#name, &ModelParams::name}

constexpr std::array<ParamField, 20> kFields = {
    MVCG_FIELD(T),       MVCG_FIELD(k_p),     MVCG_FIELD(k_c),
    MVCG_FIELD(l_p),     MVCG_FIELD(l_c),     MVCG_FIELD(sigma_p),
    MVCG_FIELD(sigma_c), MVCG_FIELD(eta_p),   MVCG_FIELD(eta_c),
    MVCG_FIELD(rho_p),   MVCG_FIELD(rho_c),   MVCG_FIELD(gamma),
    MVCG_FIELD(delta),   MVCG_FIELD(p0),      MVCG_FIELD(p1),
    MVCG_FIELD(s0),      MVCG_FIELD(q0),      MVCG_FIELD(c0),
    MVCG_FIELD(lambda),  MVCG_FIELD(F),
};

#undef MVCG_FIELD

std::string describe(const std::vector<Violation>& violations) {
  std::ostringstream out;
  out << "invalid model parameters:";
  for (const auto& v : violations) out << " [" << v.field << ": " << v.reason << "]";
  return out.str();
}

double tanh_form(double k, double a, double tau) {
  const double r = std::sqrt(2.0 * a / k);
  return -0.5 * k * r * std::tanh(r * tau);
}

// d/dt of tanh_form with tau = T - t: a * sech^2(r tau).
double tanh_form_derivative(double k, double a, double tau) {
  const double r = std::sqrt(2.0 * a / k);
  const double sech = 1.0 / std::cosh(r * tau);
  return a * sech * sech;
}

void require_time(const ModelParams& p, double t) {
  const double slack = 1e-12 * p.T;
  if (!(t >= -slack && t <= p.T + slack))
    throw std::out_of_range("time " + std::to_string(t) +
                            " outside [0, T]");
}

}  // namespace

const std::array<ParamField, 20>& param_fields() { return kFields; }

const ParamField* find_param_field(std::string_view name) {
  for (const auto& f : kFields)
    if (f.name == name) return &f;
  return nullptr;
}

ModelParams reference_params() {
  ModelParams p;
  p.T = 1.0;
  p.k_p = p.k_c = 5.0;
  p.l_p = p.l_c = 5.0;
  p.sigma_p = p.sigma_c = 10.0;
  p.eta_p = p.eta_c = 0.01;
  p.gamma = 1.2;
  p.rho_p = 0.5;
  p.rho_c = 0.5 / p.gamma;
  p.delta = 5.0;
  p.s0 = 50.0;
  p.p0 = 2.0 * p.s0 + p.gamma * p.delta;
  p.p1 = 0.2;
  p.q0 = p.c0 = 100.0;
  return p;
}

ModelParams swap_roles(const ModelParams& p) {
  ModelParams s = p;
  std::swap(s.k_p, s.k_c);
  std::swap(s.l_p, s.l_c);
  std::swap(s.sigma_p, s.sigma_c);
  std::swap(s.eta_p, s.eta_c);
  std::swap(s.q0, s.c0);
  s.rho_p = p.gamma * p.rho_c;
  s.rho_c = p.rho_p / p.gamma;
  return s;
}

ConstraintViolation::ConstraintViolation(std::vector<Violation> violations)
    : std::invalid_argument(describe(violations)),
      violations_(std::move(violations)) {}

ValidatedParams ValidatedParams::with_contract(double lambda, double F) const {
  ModelParams p = params_;
  p.lambda = lambda;
  p.F = F;
  return validate_params(p);
}

ValidatedParams validate_params(const ModelParams& p) {
  std::vector<Violation> bad;

  for (const auto& f : kFields)
    if (!std::isfinite(p.*f.member))
      bad.push_back({std::string(f.name), "must be finite"});

  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0)) bad.push_back({name, "must be > 0"});
  };
  auto non_negative = [&](double v, const char* name) {
    if (!(v >= 0.0)) bad.push_back({name, "must be >= 0"});
  };

  positive(p.T, "T");
  positive(p.k_p, "k_p");
  positive(p.k_c, "k_c");
  non_negative(p.l_p, "l_p");
  non_negative(p.l_c, "l_c");
  non_negative(p.sigma_p, "sigma_p");
  non_negative(p.sigma_c, "sigma_c");
  positive(p.eta_p, "eta_p");
  positive(p.eta_c, "eta_c");
  non_negative(p.rho_p, "rho_p");
  non_negative(p.rho_c, "rho_c");
  positive(p.gamma, "gamma");
  positive(p.delta, "delta");
  positive(p.p0, "p0");
  positive(p.p1, "p1");
  positive(p.s0, "s0");
  positive(p.q0, "q0");
  positive(p.c0, "c0");
  if (!(p.gamma > p.p1)) bad.push_back({"gamma", "gamma must exceed p1"});

  if (!bad.empty()) throw ConstraintViolation(std::move(bad));
  return ValidatedParams(p);
}

double riccati_rate(const ModelParams& p, RiccatiKind which) {
  const double l2 = p.lambda * p.lambda;
  const double gr = p.gamma * p.rho_c;
  switch (which) {
    case RiccatiKind::kKp:
      return p.rho_p + p.eta_p * l2 * p.rho_p * p.rho_p;
    case RiccatiKind::kLambdaP:
      return p.rho_p;
    case RiccatiKind::kKc:
      return gr * (p.gamma - p.p1) + p.eta_c * l2 * gr * gr;
    case RiccatiKind::kLambdaC:
      return gr * (p.gamma - p.p1);
  }
  return 0.0;
}

double riccati_cost(const ModelParams& p, RiccatiKind which) {
  return which == RiccatiKind::kKp || which == RiccatiKind::kLambdaP ? p.k_p
                                                                      : p.k_c;
}

double closed_form_K(const ValidatedParams& vp, double t, RiccatiKind which) {
  const ModelParams& p = vp.get();
  require_time(p, t);
  return tanh_form(riccati_cost(p, which), riccati_rate(p, which), p.T - t);
}

double closed_form_K_derivative(const ValidatedParams& vp, double t,
                                RiccatiKind which) {
  const ModelParams& p = vp.get();
  require_time(p, t);
  return tanh_form_derivative(riccati_cost(p, which), riccati_rate(p, which),
                              p.T - t);
}

double CoefficientSet::Kp(double t) const {
  return closed_form_K(params_, t, RiccatiKind::kKp);
}
double CoefficientSet::Kc(double t) const {
  return closed_form_K(params_, t, RiccatiKind::kKc);
}
double CoefficientSet::Lp_fun(double t) const {
  return closed_form_K(params_, t, RiccatiKind::kLambdaP);
}
double CoefficientSet::Lc_fun(double t) const {
  return closed_form_K(params_, t, RiccatiKind::kLambdaC);
}
double CoefficientSet::Kp_derivative(double t) const {
  return closed_form_K_derivative(params_, t, RiccatiKind::kKp);
}
double CoefficientSet::Kc_derivative(double t) const {
  return closed_form_K_derivative(params_, t, RiccatiKind::kKc);
}

Eigen::Matrix2d CoefficientSet::Phi(double t) const {
  const ModelParams& p = params_.get();
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  m(0, 0) = -2.0 / p.k_p * Kp(t);
  m(1, 1) = -2.0 / p.k_c * Kc(t);
  return m;
}

Eigen::Matrix2d CoefficientSet::Phi_hat(double t) const {
  const ModelParams& p = params_.get();
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  m(0, 0) = -2.0 / p.k_p * Lp_fun(t);
  m(1, 1) = -2.0 / p.k_c * Lc_fun(t);
  return m;
}

CoefficientSet build_coefficients(const ValidatedParams& vp) {
  const ModelParams& p = vp.get();
  CoefficientSet c(vp);

  const double l2 = p.lambda * p.lambda;
  const double gr = p.gamma * p.rho_c;
  const double cross_p = -p.rho_p * gr * p.eta_p * l2;
  const double cross_c = -p.rho_p * gr * p.eta_c * l2;

  c.Xi_hat << 0.0, -0.5 * gr,
              -0.5 * p.rho_p * (p.gamma - p.p1), 0.0;
  c.Xi = c.Xi_hat;
  c.Xi(0, 1) += cross_p;
  c.Xi(1, 0) += cross_c;

  c.R_mat << -2.0 / p.k_p, 0.0,
             0.0, -2.0 / p.k_c;

  c.Psi << -0.5 * p.s0,
           -0.5 * (p.p0 + p.p1 * p.s0 - p.gamma * (p.delta + p.s0));
  return c;
}

}  // namespace mvcg
