#include "mvcg/equilibrium.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mvcg {

using Eigen::Matrix2d;
using Eigen::Vector2d;

RequiresCertifiedSolution::RequiresCertifiedSolution()
    : std::logic_error("feedback policy needs a Riccati solution with the "
                       "volatility condition certified") {}

namespace {

double vol_control(double sigma, double l, double K, double pi_ii) {
  return sigma * l / (l - 2.0 * (K + pi_ii));
}

// d/dt of vol_control given K' and pi_ii'.
double vol_control_slope(double sigma, double l, double K, double pi_ii,
                         double dK, double dpi_ii) {
  const double d = l - 2.0 * (K + pi_ii);
  return 2.0 * sigma * l * (dK + dpi_ii) / (d * d);
}

struct Moments {
  double qbar, cbar, vq, vc, cov;
};

Moments unpack(const MomentState& m) {
  return {m(0), m(1), m(2) - m(0) * m(0), m(3) - m(1) * m(1),
          m(4) - m(0) * m(1)};
}

struct YStats {
  double ybar_p, ybar_c, eyp2, eyc2;
};

YStats y_stats(const Moments& m, const Matrix2d& pi, const Matrix2d& pi_hat,
               const Vector2d& h) {
  YStats s;
  s.ybar_p = pi_hat(0, 0) * m.qbar + pi_hat(0, 1) * m.cbar + h(0);
  s.ybar_c = pi_hat(1, 0) * m.qbar + pi_hat(1, 1) * m.cbar + h(1);
  s.eyp2 = pi(0, 0) * pi(0, 0) * m.vq + 2.0 * pi(0, 0) * pi(0, 1) * m.cov +
           pi(0, 1) * pi(0, 1) * m.vc + s.ybar_p * s.ybar_p;
  s.eyc2 = pi(1, 0) * pi(1, 0) * m.vq + 2.0 * pi(1, 0) * pi(1, 1) * m.cov +
           pi(1, 1) * pi(1, 1) * m.vc + s.ybar_c * s.ybar_c;
  return s;
}

}  // namespace

FeedbackPolicy::FeedbackPolicy(const CoefficientSet& coeffs,
                               std::shared_ptr<const RiccatiSolution> ric,
                               ScalarFunction z, ScalarFunction y)
    : coeffs_(coeffs),
      ric_(std::move(ric)),
      z_star_(std::move(z)),
      y_star_(std::move(y)) {}

PlayerGains FeedbackPolicy::producer(double t) const {
  const ModelParams& p = coeffs_.params().get();
  const Matrix2d pi = ric_->pi(t);
  const Matrix2d ph = ric_->pi_hat(t);
  const double s = 2.0 / p.k_p;
  return {s * (coeffs_.Kp(t) + pi(0, 0)), s * pi(0, 1),
          s * (coeffs_.Lp_fun(t) + ph(0, 0)), s * ph(0, 1), s * ric_->h(t)(0)};
}

PlayerGains FeedbackPolicy::consumer(double t) const {
  const ModelParams& p = coeffs_.params().get();
  const Matrix2d pi = ric_->pi(t);
  const Matrix2d ph = ric_->pi_hat(t);
  const double s = 2.0 / p.k_c;
  return {s * (coeffs_.Kc(t) + pi(1, 1)), s * pi(1, 0),
          s * (coeffs_.Lc_fun(t) + ph(1, 1)), s * ph(1, 0), s * ric_->h(t)(1)};
}

double FeedbackPolicy::z(double t) const {
  const ModelParams& p = coeffs_.params().get();
  return vol_control(p.sigma_p, p.l_p, coeffs_.Kp(t), ric_->pi(t)(0, 0));
}

double FeedbackPolicy::y(double t) const {
  const ModelParams& p = coeffs_.params().get();
  return vol_control(p.sigma_c, p.l_c, coeffs_.Kc(t), ric_->pi(t)(1, 1));
}

FeedbackPolicy build_policy(const CoefficientSet& coeffs,
                            std::shared_ptr<const RiccatiSolution> ric) {
  if (!ric || !ric->a2_certified) throw RequiresCertifiedSolution();
  const ModelParams& p = coeffs.params().get();
  const TimeGrid& grid = ric->grid();
  const int n = grid.size();
  std::vector<double> z(n), dz(n), y(n), dy(n);
  for (int i = 0; i < n; ++i) {
    const double t = grid.node(i);
    const Matrix2d& pi = ric->pi.at(i);
    const Matrix2d& dpi = ric->pi.slope(i);
    z[i] = vol_control(p.sigma_p, p.l_p, coeffs.Kp(t), pi(0, 0));
    y[i] = vol_control(p.sigma_c, p.l_c, coeffs.Kc(t), pi(1, 1));
    dz[i] = vol_control_slope(p.sigma_p, p.l_p, coeffs.Kp(t), pi(0, 0),
                              coeffs.Kp_derivative(t), dpi(0, 0));
    dy[i] = vol_control_slope(p.sigma_c, p.l_c, coeffs.Kc(t), pi(1, 1),
                              coeffs.Kc_derivative(t), dpi(1, 1));
  }
  return FeedbackPolicy(coeffs, std::move(ric),
                        ScalarFunction(grid, std::move(z), std::move(dz)),
                        ScalarFunction(grid, std::move(y), std::move(dy)));
}

MomentTrajectory integrate_moments(const FeedbackPolicy& policy) {
  const ModelParams& p = policy.coefficients().params().get();
  const TimeGrid& grid = policy.grid();

  auto rhs = [&](double t, const MomentState& m) -> MomentState {
    const PlayerGains gp = policy.producer(t);
    const PlayerGains gc = policy.consumer(t);
    const double z = policy.z(t);
    const double y = policy.y(t);

    Matrix2d A, A_hat, sigma;
    A << gp.own_dev, gp.other_dev, gc.other_dev, gc.own_dev;
    A_hat << gp.own_mean, gp.other_mean, gc.other_mean, gc.own_mean;
    const Vector2d b(gp.constant, gc.constant);

    const Moments mo = unpack(m);
    const Vector2d xbar(mo.qbar, mo.cbar);
    sigma << mo.vq, mo.cov, mo.cov, mo.vc;

    const Vector2d dxbar = A_hat * xbar + b;
    Matrix2d dsecond = A * sigma + sigma * A.transpose();
    dsecond(0, 0) += z * z;
    dsecond(1, 1) += y * y;
    dsecond += dxbar * xbar.transpose() + xbar * dxbar.transpose();

    MomentState d;
    d << dxbar(0), dxbar(1), dsecond(0, 0), dsecond(1, 1), dsecond(0, 1);
    return d;
  };

  MomentState init;
  init << p.q0, p.c0, p.q0 * p.q0, p.c0 * p.c0, p.q0 * p.c0;

  MomentTrajectory traj{integrate_forward<MomentState>(grid, init, rhs), {}, {}, {},
                        {}, {}, {}, {}, {}};
  const RiccatiSolution& ric = policy.riccati();
  const int n = grid.size();
  for (auto* v : {&traj.var_q, &traj.var_c, &traj.cov_qc, &traj.ybar_p,
                  &traj.ybar_c, &traj.eyp2, &traj.eyc2, &traj.expected_spot})
    v->resize(n);
  for (int i = 0; i < n; ++i) {
    const Moments mo = unpack(traj.state.at(i));
    const YStats ys = y_stats(mo, ric.pi.at(i), ric.pi_hat.at(i), ric.h.at(i));
    traj.var_q[i] = mo.vq;
    traj.var_c[i] = mo.vc;
    traj.cov_qc[i] = mo.cov;
    traj.ybar_p[i] = ys.ybar_p;
    traj.ybar_c[i] = ys.ybar_c;
    traj.eyp2[i] = ys.eyp2;
    traj.eyc2[i] = ys.eyc2;
    traj.expected_spot[i] = p.s0 - p.rho_p * mo.qbar + p.gamma * p.rho_c * mo.cbar;
  }
  return traj;
}

YsqCrosscheck crosscheck_Ysq_backward(const MomentTrajectory& traj,
                                      const FeedbackPolicy& policy) {
  const CoefficientSet& c = policy.coefficients();
  const ModelParams& p = c.params().get();
  const RiccatiSolution& ric = policy.riccati();
  const TimeGrid& grid = traj.grid();
  if (grid != policy.grid())
    throw std::invalid_argument("moments and policy live on different grids");

  const double l2 = p.lambda * p.lambda;
  const double gr = p.gamma * p.rho_c;
  const double const_c = 0.5 * (p.p0 + p.p1 * p.s0 - p.gamma * (p.s0 + p.delta));

  // Backward dynamics of (E[(Y^p)^2], E[(Y^c)^2]); linear in the unknowns.
  auto rhs = [&](double t, const Vector2d& e) -> Vector2d {
    const MomentState ms = traj.state(t);
    const Moments m = unpack(ms);
    const Matrix2d pi = ric.pi(t);
    const Matrix2d ph = ric.pi_hat(t);
    const Vector2d h = ric.h(t);
    const YStats ys = y_stats(m, pi, ph, h);
    const double z = policy.z(t);
    const double y = policy.y(t);
    const double eqq = ms(2), ecc = ms(3), eqc = ms(4);
    const double cq = m.qbar * m.cbar;

    const double eyp_c = pi(0, 0) * (eqc - cq) + pi(0, 1) * (ecc - m.cbar * m.cbar) +
                         ph(0, 0) * cq + ph(0, 1) * m.cbar * m.cbar + h(0) * m.cbar;
    const double eyc_q = pi(1, 0) * (eqq - m.qbar * m.qbar) + pi(1, 1) * (eqc - cq) +
                         ph(1, 0) * m.qbar * m.qbar + ph(1, 1) * cq + h(1) * m.qbar;

    const double yp2 = ys.ybar_p * ys.ybar_p;
    const double yc2 = ys.ybar_c * ys.ybar_c;
    const double dp =
        -2.0 * (0.5 * p.s0 * ys.ybar_p + 0.5 * gr * eyp_c +
                p.rho_p * gr * p.eta_p * l2 * (eyp_c - ys.ybar_p * m.cbar) +
                2.0 / p.k_p * (c.Kp(t) * (e(0) - yp2) + c.Lp_fun(t) * yp2)) +
        pi(0, 0) * pi(0, 0) * z * z + pi(0, 1) * pi(0, 1) * y * y;
    const double dc =
        -2.0 * (const_c * ys.ybar_c + 0.5 * p.rho_p * (p.gamma - p.p1) * eyc_q +
                p.rho_p * gr * p.eta_c * l2 * (eyc_q - ys.ybar_c * m.qbar) +
                2.0 / p.k_c * (c.Kc(t) * (e(1) - yc2) + c.Lc_fun(t) * yc2)) +
        pi(1, 0) * pi(1, 0) * z * z + pi(1, 1) * pi(1, 1) * y * y;
    return Vector2d(dp, dc);
  };

  const Vector2d terminal(0.25 * l2 * p.rho_p * p.rho_p, 0.25 * l2 * gr * gr);
  VectorFunction sol = integrate_backward<Vector2d>(grid, terminal, rhs, false);

  const int n = grid.size();
  std::vector<double> ep(n), ec(n), dep(n), dec(n);
  double res_p = 0.0, res_c = 0.0;
  for (int i = 0; i < n; ++i) {
    ep[i] = sol.at(i)(0);
    ec[i] = sol.at(i)(1);
    dep[i] = sol.slope(i)(0);
    dec[i] = sol.slope(i)(1);
    res_p = std::max(res_p, std::abs(ep[i] - traj.eyp2[i]));
    res_c = std::max(res_c, std::abs(ec[i] - traj.eyc2[i]));
  }
  return {ScalarFunction(grid, std::move(ep), std::move(dep)),
          ScalarFunction(grid, std::move(ec), std::move(dec)), res_p, res_c};
}

RValues compute_R(const MomentTrajectory& traj, const FeedbackPolicy& policy) {
  const CoefficientSet& c = policy.coefficients();
  const ModelParams& p = c.params().get();
  const RiccatiSolution& ric = policy.riccati();
  const TimeGrid& grid = traj.grid();
  if (grid != policy.grid())
    throw std::invalid_argument("moments and policy live on different grids");
  if (grid.n_steps() % 2 != 0) throw GridParity(grid.n_steps());

  const double l2 = p.lambda * p.lambda;
  const double gr = p.gamma * p.rho_c;
  const int n = grid.size();
  std::vector<double> fp(n), fc(n);
  for (int i = 0; i < n; ++i) {
    const double t = grid.node(i);
    const Matrix2d& pi = ric.pi.at(i);
    const double zp = pi(0, 0) * policy.z_star().at(i) + 0.5 * p.l_p * p.sigma_p;
    const double zc = pi(1, 1) * policy.y_star().at(i) + 0.5 * p.l_c * p.sigma_c;
    fp[i] = 2.0 / p.k_p * traj.eyp2[i] - p.eta_p * l2 * gr * gr * traj.var_c[i] +
            2.0 * zp * zp / (p.l_p - 2.0 * c.Kp(t));
    fc[i] = 2.0 / p.k_c * traj.eyc2[i] -
            p.eta_c * l2 * p.rho_p * p.rho_p * traj.var_q[i] +
            2.0 * zc * zc / (p.l_c - 2.0 * c.Kc(t));
  }
  const int last = grid.n_steps();
  return {simpson(grid, fp) - p.lambda * gr * traj.cbar(last),
          simpson(grid, fc) - p.lambda * p.rho_p * traj.qbar(last)};
}

EquilibriumReport compute_payoffs(const ValidatedParams& vp,
                                  std::shared_ptr<const FeedbackPolicy> policy,
                                  std::shared_ptr<const MomentTrajectory> traj,
                                  const RValues& R) {
  const ModelParams& p = vp.get();
  const CoefficientSet& c = policy->coefficients();
  const RiccatiSolution& ric = policy->riccati();
  const Matrix2d& ph0 = ric.pi_hat.at(0);
  const Vector2d& h0 = ric.h.at(0);

  EquilibriumReport r;
  r.lambda = p.lambda;
  r.F = p.F;
  r.R_p0 = R.R_p0;
  r.R_c0 = R.R_c0;
  r.h1_0 = h0(0);
  r.h2_0 = h0(1);
  r.Ybar_p0 = ph0(0, 0) * p.q0 + ph0(0, 1) * p.c0 + h0(0);
  r.Ybar_c0 = ph0(1, 0) * p.q0 + ph0(1, 1) * p.c0 + h0(1);
  r.J_p_star = c.Lp_fun(0.0) * p.q0 * p.q0 + 2.0 * r.Ybar_p0 * p.q0 + R.R_p0 + p.F -
               p.lambda * p.s0 - 0.5 * p.l_p * p.sigma_p * p.sigma_p * p.T;
  r.J_c_star = c.Lc_fun(0.0) * p.c0 * p.c0 + 2.0 * r.Ybar_c0 * p.c0 + R.R_c0 - p.F +
               p.lambda * p.s0 - 0.5 * p.l_c * p.sigma_c * p.sigma_c * p.T;
  r.expected_spot_T = traj->expected_spot.back();
  r.min_margin_p = ric.min_margin_p;
  r.min_margin_c = ric.min_margin_c;
  r.policy = std::move(policy);
  r.moments = std::move(traj);
  return r;
}

EquilibriumReport solve_equilibrium(const ValidatedParams& p,
                                    const SolverSettings& settings) {
  const CoefficientSet coeffs = build_coefficients(p);
  const TimeGrid grid(p->T, settings.n_steps);
  if (grid.n_steps() % 2 != 0) throw GridParity(grid.n_steps());
  auto ric = std::make_shared<RiccatiSolution>(solve_riccati(coeffs, grid));
  check_A2(coeffs, ric->pi);
  auto policy = std::make_shared<const FeedbackPolicy>(build_policy(coeffs, ric));
  auto traj = std::make_shared<const MomentTrajectory>(integrate_moments(*policy));
  const RValues R = compute_R(*traj, *policy);
  return compute_payoffs(p, std::move(policy), std::move(traj), R);
}

std::string report_csv_header() {
  return "lambda,F,J_p_star,J_c_star,R_p0,R_c0,Ybar_p0,Ybar_c0,h1_0,h2_0,"
         "expected_spot_T,min_margin_p,min_margin_c";
}

std::string report_csv_row(const EquilibriumReport& r) {
  std::string out;
  for (double v : {r.lambda, r.F, r.J_p_star, r.J_c_star, r.R_p0, r.R_c0,
                   r.Ybar_p0, r.Ybar_c0, r.h1_0, r.h2_0, r.expected_spot_T,
                   r.min_margin_p, r.min_margin_c}) {
    if (!out.empty()) out += ',';
    out += format_double(v);
  }
  return out;
}

void write_report_text(std::ostream& out, const EquilibriumReport& r) {
  const auto line = [&](const char* key, double v) {
    out << key << std::string(18 - std::string(key).size(), ' ')
        << format_double(v) << '\n';
  };
  line("lambda", r.lambda);
  line("F", r.F);
  line("J_p_star", r.J_p_star);
  line("J_c_star", r.J_c_star);
  line("R_p0", r.R_p0);
  line("R_c0", r.R_c0);
  line("Ybar_p0", r.Ybar_p0);
  line("Ybar_c0", r.Ybar_c0);
  line("h1_0", r.h1_0);
  line("h2_0", r.h2_0);
  line("expected_spot_T", r.expected_spot_T);
  line("min_margin_p", r.min_margin_p);
  line("min_margin_c", r.min_margin_c);
}

void write_moments_csv(std::ostream& out, const EquilibriumReport& r) {
  const MomentTrajectory& m = *r.moments;
  const FeedbackPolicy& pol = *r.policy;
  out << "t,qbar,cbar,Eq2,Ec2,Eqc,ES,zstar,ystar,Vq,Vc,Cov,Ybar_p,Ybar_c,EYp2,EYc2\n";
  for (int i = 0; i < m.grid().size(); ++i) {
    const double row[] = {m.grid().node(i), m.qbar(i), m.cbar(i), m.eq2(i),
                          m.ec2(i), m.eqc(i), m.expected_spot[i],
                          pol.z_star().at(i), pol.y_star().at(i), m.var_q[i],
                          m.var_c[i], m.cov_qc[i], m.ybar_p[i], m.ybar_c[i],
                          m.eyp2[i], m.eyc2[i]};
    bool first = true;
    for (double v : row) {
      if (!first) out << ',';
      out << format_double(v);
      first = false;
    }
    out << '\n';
  }
}

}  // namespace mvcg
