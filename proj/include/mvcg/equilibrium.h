///////////////////////////////////////////////////////////////////////////////
//
// Nash equilibrium assembly: feedback policy, forward moment trajectory,
// R quadratures and equilibrium payoffs.
//
// At equilibrium the producer plays
//
//   u* = (2/k_p) [ (K_p + pi_11)(q - qbar) + pi_12 (c - cbar)
//                  + (Lambda_p + pi_hat_11) qbar + pi_hat_12 cbar + h_1 ]
//   z* = sigma_p l_p / (l_p - 2 (K_p + pi_11))
//
// and the consumer the mirror image with indices swapped. The adjoint is
// linear in the state, Y = pi (X - Xbar) + pi_hat Xbar + h, so its moments
// follow algebraically from those of (q, c).
//
///////////////////////////////////////////////////////////////////////////////

#ifndef MVCG_EQUILIBRIUM_H
#define MVCG_EQUILIBRIUM_H

#include <Eigen/Core>

#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvcg/grid.h"
#include "mvcg/model.h"
#include "mvcg/riccati.h"

namespace mvcg {

class RequiresCertifiedSolution : public std::logic_error {
 public:
  RequiresCertifiedSolution();
};

// Affine drift law: own_dev (x - xbar) + other_dev (w - wbar)
//                   + own_mean xbar + other_mean wbar + constant.
struct PlayerGains {
  double own_dev = 0.0;
  double other_dev = 0.0;
  double own_mean = 0.0;
  double other_mean = 0.0;
  double constant = 0.0;

  double drift(double own, double other, double own_bar, double other_bar) const {
    return own_dev * (own - own_bar) + other_dev * (other - other_bar) +
           own_mean * own_bar + other_mean * other_bar + constant;
  }
};

class FeedbackPolicy {
 public:
  PlayerGains producer(double t) const;
  PlayerGains consumer(double t) const;

  // Volatility controls at arbitrary t (Hermite-interpolated pi).
  double z(double t) const;
  double y(double t) const;

  // The same, tabulated on the Riccati grid.
  const ScalarFunction& z_star() const { return z_star_; }
  const ScalarFunction& y_star() const { return y_star_; }

  const CoefficientSet& coefficients() const { return coeffs_; }
  const RiccatiSolution& riccati() const { return *ric_; }
  const TimeGrid& grid() const { return ric_->grid(); }

 private:
  friend FeedbackPolicy build_policy(const CoefficientSet& coeffs,
                                     std::shared_ptr<const RiccatiSolution> ric);
  FeedbackPolicy(const CoefficientSet& coeffs,
                 std::shared_ptr<const RiccatiSolution> ric, ScalarFunction z,
                 ScalarFunction y);

  CoefficientSet coeffs_;
  std::shared_ptr<const RiccatiSolution> ric_;
  ScalarFunction z_star_;
  ScalarFunction y_star_;
};

// Throws RequiresCertifiedSolution unless ric->a2_certified.
FeedbackPolicy build_policy(const CoefficientSet& coeffs,
                            std::shared_ptr<const RiccatiSolution> ric);

// State of the moment system: (qbar, cbar, E[q^2], E[c^2], E[qc]).
using MomentState = Eigen::Matrix<double, 5, 1>;

struct MomentTrajectory {
  GridFunction<MomentState> state;

  // Derived node values.
  std::vector<double> var_q, var_c, cov_qc;
  std::vector<double> ybar_p, ybar_c;  // E[Y^p], E[Y^c]
  std::vector<double> eyp2, eyc2;      // E[(Y^p)^2], E[(Y^c)^2]
  std::vector<double> expected_spot;   // E[S]

  const TimeGrid& grid() const { return state.grid(); }
  double qbar(int i) const { return state.at(i)(0); }
  double cbar(int i) const { return state.at(i)(1); }
  double eq2(int i) const { return state.at(i)(2); }
  double ec2(int i) const { return state.at(i)(3); }
  double eqc(int i) const { return state.at(i)(4); }
};

MomentTrajectory integrate_moments(const FeedbackPolicy& policy);

// Integrates the backward ODEs for E[(Y^p)^2] and E[(Y^c)^2] driven by the
// forward moments and returns the max discrepancy from the algebraic values.
struct YsqCrosscheck {
  ScalarFunction eyp2;
  ScalarFunction eyc2;
  double max_residual_p;
  double max_residual_c;
  double max_residual() const { return std::max(max_residual_p, max_residual_c); }
};

YsqCrosscheck crosscheck_Ysq_backward(const MomentTrajectory& traj,
                                      const FeedbackPolicy& policy);

struct RValues {
  double R_p0;
  double R_c0;
};

// Composite Simpson; throws GridParity for odd n_steps.
RValues compute_R(const MomentTrajectory& traj, const FeedbackPolicy& policy);

struct EquilibriumReport {
  double lambda = 0.0;
  double F = 0.0;
  double J_p_star = 0.0;
  double J_c_star = 0.0;
  double R_p0 = 0.0;
  double R_c0 = 0.0;
  double Ybar_p0 = 0.0;
  double Ybar_c0 = 0.0;
  double h1_0 = 0.0;
  double h2_0 = 0.0;
  double expected_spot_T = 0.0;
  double min_margin_p = 0.0;
  double min_margin_c = 0.0;
  std::shared_ptr<const FeedbackPolicy> policy;
  std::shared_ptr<const MomentTrajectory> moments;
};

EquilibriumReport compute_payoffs(const ValidatedParams& p,
                                  std::shared_ptr<const FeedbackPolicy> policy,
                                  std::shared_ptr<const MomentTrajectory> traj,
                                  const RValues& R);

struct SolverSettings {
  int n_steps = 2000;
};

// Full pipeline. Throws BlowUp, A2Violation, GridParity.
EquilibriumReport solve_equilibrium(const ValidatedParams& p,
                                    const SolverSettings& settings = {});

std::string report_csv_header();
std::string report_csv_row(const EquilibriumReport& r);
void write_report_text(std::ostream& out, const EquilibriumReport& r);

// t,qbar,cbar,Eq2,Ec2,Eqc,ES,zstar,ystar,Vq,Vc,Cov,Ybar_p,Ybar_c,EYp2,EYc2
void write_moments_csv(std::ostream& out, const EquilibriumReport& r);

}  // namespace mvcg

#endif  // MVCG_EQUILIBRIUM_H
