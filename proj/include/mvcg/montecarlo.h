///////////////////////////////////////////////////////////////////////////////
//
// Monte Carlo validation of the equilibrium.
//
// Paths of the closed-loop state are simulated with Euler-Maruyama on a
// uniform grid whose nodes are nodes of the Riccati grid. The mean-field
// terms qbar, cbar in the feedback law come from the deterministic moment
// trajectory. Time integrals use the trapezoid rule and the variance
// penalty uses the unbiased cross-sectional variance of S at every node.
//
// Normals are drawn from Philox keyed by the seed with counter (step, path),
// and paths are reduced in fixed blocks, so results are bit-identical for
// any number of worker threads.
//
///////////////////////////////////////////////////////////////////////////////

#ifndef MVCG_MONTECARLO_H
#define MVCG_MONTECARLO_H

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvcg/equilibrium.h"
#include "mvcg/model.h"

namespace mvcg {

// A unilateral producer deviation: epsilon is added to one drift gain (see
// PlayerGains) or to the volatility control z.
struct Deviation {
  enum class Target { kOwnDev, kOtherDev, kOwnMean, kOtherMean, kConstant, kVolatility };
  Target target = Target::kOwnMean;
  double epsilon = 0.0;
};

const char* target_name(Deviation::Target t);
// Accepts own_dev, other_dev, own_mean (alias qbar_gain), other_mean,
// constant, z. Throws std::invalid_argument otherwise.
Deviation::Target parse_target(const std::string& name);

struct SimConfig {
  long n_paths = 100000;
  int n_time_steps = 1000;
  std::uint64_t seed = 42;
  std::optional<Deviation> deviation;
  int n_threads = 0;  // 0: hardware concurrency
};

// Throws std::invalid_argument unless n_paths >= 2, n_time_steps >= 1 and
// n_time_steps divides the Riccati grid's n_steps.
void validate_sim_config(const SimConfig& cfg, const TimeGrid& riccati_grid);

struct TermBreakdown {
  double profit = 0.0;            // E int (q S) or E int c (p0 + p1 S) - gamma c (S + delta)
  double drift_cost = 0.0;        // E int (k/2) u^2
  double volatility_cost = 0.0;   // E int (l/2) (z - sigma)^2
  double contract = 0.0;          // E[F - lambda S_T] or its negative
  double variance_penalty = 0.0;  // eta lambda^2 int Vhat[S]
};

struct NodeMoments {
  double t;
  double mean_q, mean_c, var_q, var_c, cov_qc, var_S;
};

struct MomentCheck {
  double t;
  std::string quantity;  // qbar, cbar, Eq2, Ec2, Eqc
  double empirical;
  double ode;
  double se;
  double z() const { return se > 0 ? (empirical - ode) / se : 0.0; }
};

struct McEstimate {
  double J_p_hat = 0.0;
  double J_c_hat = 0.0;
  double se_p = 0.0;
  double se_c = 0.0;
  TermBreakdown terms_p;
  TermBreakdown terms_c;

  // Trapezoid integrals of the cross-sectional statistics.
  double int_var_S = 0.0;
  double int_var_q = 0.0;
  double int_var_c = 0.0;
  double int_cov_qc = 0.0;

  std::vector<NodeMoments> nodes;
  std::vector<MomentCheck> moment_checks;  // t = T/4, T/2, T

  // Set when cfg.deviation is present: the producer's estimate under the
  // deviation, against the consumer's equilibrium path.
  std::optional<double> J_p_deviated;
  std::optional<double> delta_J_p;
  std::optional<double> delta_se;
};

McEstimate simulate_equilibrium(const EquilibriumReport& eq, const ValidatedParams& p,
                                const SimConfig& cfg);

struct DeviationRow {
  Deviation deviation;
  double delta_J_p;  // J_p(deviated) - J_p(equilibrium)
  double se;         // paired standard error
  double z() const { return se > 0 ? delta_J_p / se : 0.0; }
};

// All arms share one set of normals. The consumer path is the equilibrium
// one, driven by the equilibrium producer path.
std::vector<DeviationRow> deviation_test(const EquilibriumReport& eq,
                                         const ValidatedParams& p,
                                         const SimConfig& cfg,
                                         const std::vector<Deviation>& arms);

struct BandCheck {
  std::string name;
  double estimate, reference, se, width;  // pass iff |estimate - reference| <= width * se
  bool pass() const;
};

std::vector<BandCheck> acceptance_bands(const McEstimate& mc,
                                        const EquilibriumReport& eq);

void write_estimate_text(std::ostream& out, const McEstimate& mc);
void write_estimate_csv(std::ostream& out, const McEstimate& mc);

}  // namespace mvcg

#endif  // MVCG_MONTECARLO_H
