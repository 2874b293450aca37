#include "mvcg/riccati.h"

#include <limits>

namespace mvcg {

using Eigen::Matrix2d;
using Eigen::Vector2d;

const char* player_name(Player p) {
  return p == Player::kProducer ? "producer" : "consumer";
}

A2Violation::A2Violation(Player player, double t, double margin)
    : std::runtime_error(std::string("volatility condition fails for the ") +
                         player_name(player) + " at t = " + format_double(t) +
                         " (margin " + format_double(margin) + ")"),
      player_(player),
      t_(t),
      margin_(margin) {}

MatrixFunction solve_pi(const CoefficientSet& c, const TimeGrid& grid) {
  return integrate_backward<Matrix2d>(
      grid, Matrix2d::Zero(), [&](double t, const Matrix2d& pi) -> Matrix2d {
        const Matrix2d phi = c.Phi(t);
        return c.Xi + phi * pi + pi * phi + pi * c.R_mat * pi;
      });
}

MatrixFunction solve_pi_hat(const CoefficientSet& c, const TimeGrid& grid) {
  return integrate_backward<Matrix2d>(
      grid, Matrix2d::Zero(), [&](double t, const Matrix2d& pi) -> Matrix2d {
        const Matrix2d phi = c.Phi_hat(t);
        return c.Xi_hat + phi * pi + pi * phi + pi * c.R_mat * pi;
      });
}

VectorFunction solve_h(const CoefficientSet& c, const MatrixFunction& pi_hat,
                       const TimeGrid& grid) {
  if (pi_hat.grid() != grid)
    throw std::invalid_argument("pi_hat lives on a different grid");
  const ModelParams& p = c.params().get();
  const Vector2d terminal(0.5 * p.lambda * p.rho_p,
                          0.5 * p.lambda * p.gamma * p.rho_c);
  return integrate_backward<Vector2d>(
      grid, terminal,
      [&](double t, const Vector2d& h) -> Vector2d {
        return (pi_hat(t) * c.R_mat + c.Phi_hat(t)) * h + c.Psi;
      },
      false);
}

A2Margins a2_margins(const CoefficientSet& c, const MatrixFunction& pi) {
  const ModelParams& p = c.params().get();
  const TimeGrid& grid = pi.grid();
  const int n = grid.size();
  std::vector<double> mp(n), mc(n), dmp(n), dmc(n);
  double min_p = std::numeric_limits<double>::infinity();
  double min_c = min_p;
  for (int i = 0; i < n; ++i) {
    const double t = grid.node(i);
    mp[i] = p.l_p - 2.0 * (c.Kp(t) + pi.at(i)(0, 0));
    mc[i] = p.l_c - 2.0 * (c.Kc(t) + pi.at(i)(1, 1));
    dmp[i] = -2.0 * (c.Kp_derivative(t) + pi.slope(i)(0, 0));
    dmc[i] = -2.0 * (c.Kc_derivative(t) + pi.slope(i)(1, 1));
    min_p = std::min(min_p, mp[i]);
    min_c = std::min(min_c, mc[i]);
  }
  const bool ok = min_p > 0.0 && min_c > 0.0;
  return A2Margins{ScalarFunction(grid, std::move(mp), std::move(dmp)),
                   ScalarFunction(grid, std::move(mc), std::move(dmc)), min_p,
                   min_c, ok};
}

A2Margins check_A2(const CoefficientSet& c, const MatrixFunction& pi) {
  A2Margins m = a2_margins(c, pi);
  if (m.certified) return m;
  const TimeGrid& grid = pi.grid();
  for (int i = 0; i < grid.size(); ++i) {
    if (!(m.margin_p.at(i) > 0.0))
      throw A2Violation(Player::kProducer, grid.node(i), m.margin_p.at(i));
    if (!(m.margin_c.at(i) > 0.0))
      throw A2Violation(Player::kConsumer, grid.node(i), m.margin_c.at(i));
  }
  return m;
}

RiccatiSolution solve_riccati(const CoefficientSet& c, const TimeGrid& grid) {
  MatrixFunction pi = solve_pi(c, grid);
  MatrixFunction pi_hat = solve_pi_hat(c, grid);
  VectorFunction h = solve_h(c, pi_hat, grid);
  A2Margins m = a2_margins(c, pi);
  return RiccatiSolution{std::move(pi),      std::move(pi_hat),
                         std::move(h),       std::move(m.margin_p),
                         std::move(m.margin_c), m.min_p,
                         m.min_c,            m.certified};
}

ScalarFunction solve_scalar_riccati(const ValidatedParams& vp, RiccatiKind which,
                                    const TimeGrid& grid) {
  const double a = riccati_rate(vp.get(), which);
  const double k = riccati_cost(vp.get(), which);
  return integrate_backward<double>(grid, 0.0, [&](double, double K) {
    return -2.0 / k * K * K + a;
  });
}

}  // namespace mvcg
