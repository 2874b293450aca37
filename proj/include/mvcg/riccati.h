///////////////////////////////////////////////////////////////////////////////
//
// Backward solvers for the equilibrium Riccati system
//
//   pi'     = Xi     + Phi pi         + pi Phi         + pi R pi,      pi(T) = 0
//   pi_hat' = Xi_hat + Phi_hat pi_hat + pi_hat Phi_hat + pi_hat R pi_hat
//   h'      = (pi_hat R + Phi_hat) h + Psi,    h(T) = lambda/2 (rho_p, gamma rho_c)
//
// and the volatility well-posedness check l - 2 (K + pi_ii) > 0.
//
///////////////////////////////////////////////////////////////////////////////

#ifndef MVCG_RICCATI_H
#define MVCG_RICCATI_H

#include <Eigen/Core>

#include <stdexcept>

#include "mvcg/grid.h"
#include "mvcg/model.h"

namespace mvcg {

using MatrixFunction = GridFunction<Eigen::Matrix2d>;
using VectorFunction = GridFunction<Eigen::Vector2d>;
using ScalarFunction = GridFunction<double>;

enum class Player { kProducer, kConsumer };
const char* player_name(Player p);

class A2Violation : public std::runtime_error {
 public:
  A2Violation(Player player, double t, double margin);

  Player player() const { return player_; }
  double time() const { return t_; }
  double margin() const { return margin_; }

 private:
  Player player_;
  double t_;
  double margin_;
};

// Both throw BlowUp.
MatrixFunction solve_pi(const CoefficientSet& coeffs, const TimeGrid& grid);
MatrixFunction solve_pi_hat(const CoefficientSet& coeffs, const TimeGrid& grid);

// Contract size is taken from coeffs.params().
VectorFunction solve_h(const CoefficientSet& coeffs, const MatrixFunction& pi_hat,
                       const TimeGrid& grid);

struct A2Margins {
  ScalarFunction margin_p;  // l_p - 2 (K_p + pi_11)
  ScalarFunction margin_c;  // l_c - 2 (K_c + pi_22)
  double min_p;
  double min_c;
  bool certified;
};

// Margins at every node, never throws.
A2Margins a2_margins(const CoefficientSet& coeffs, const MatrixFunction& pi);

// Same, but throws A2Violation at the first node with a non-positive margin.
A2Margins check_A2(const CoefficientSet& coeffs, const MatrixFunction& pi);

struct RiccatiSolution {
  MatrixFunction pi;
  MatrixFunction pi_hat;
  VectorFunction h;
  ScalarFunction a2_margin_p;
  ScalarFunction a2_margin_c;
  double min_margin_p;
  double min_margin_c;
  bool a2_certified;

  const TimeGrid& grid() const { return pi.grid(); }
};

// Throws BlowUp; an (A2) failure is reported through a2_certified.
RiccatiSolution solve_riccati(const CoefficientSet& coeffs, const TimeGrid& grid);

// RK4 solution of the scalar equation K' = -(2/k) K^2 + a, K(T) = 0 behind
// closed_form_K, for comparison with the closed form.
ScalarFunction solve_scalar_riccati(const ValidatedParams& p, RiccatiKind which,
                                    const TimeGrid& grid);

}  // namespace mvcg

#endif  // MVCG_RICCATI_H
