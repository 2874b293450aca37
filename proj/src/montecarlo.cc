#include "mvcg/montecarlo.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "mvcg/philox.h"

namespace mvcg {

namespace {

constexpr long kBlock = 1024;

struct NodeCoeffs {
  PlayerGains gp, gc;
  double z, y, qbar, cbar, spot;
};

// Per-node cross-sectional sums of deviations from the ODE means.
enum Slot { kDq, kDc, kDq2, kDc2, kDqc, kDs, kDs2, kEqSlots };

struct ArmState {
  PlayerGains gp_shift;  // added to the producer gains
  double z_shift = 0.0;
};

ArmState shift_for(const Deviation& d) {
  ArmState a;
  switch (d.target) {
    case Deviation::Target::kOwnDev: a.gp_shift.own_dev = d.epsilon; break;
    case Deviation::Target::kOtherDev: a.gp_shift.other_dev = d.epsilon; break;
    case Deviation::Target::kOwnMean: a.gp_shift.own_mean = d.epsilon; break;
    case Deviation::Target::kOtherMean: a.gp_shift.other_mean = d.epsilon; break;
    case Deviation::Target::kConstant: a.gp_shift.constant = d.epsilon; break;
    case Deviation::Target::kVolatility: a.z_shift = d.epsilon; break;
  }
  return a;
}

PlayerGains shifted(const PlayerGains& g, const PlayerGains& s) {
  return {g.own_dev + s.own_dev, g.other_dev + s.other_dev, g.own_mean + s.own_mean,
          g.other_mean + s.other_mean, g.constant + s.constant};
}

struct RunResult {
  McEstimate eq;
  std::vector<double> arm_J;      // per arm J_p
  std::vector<double> arm_delta;  // per arm J_p - J_p(equilibrium)
  std::vector<double> arm_se;     // paired standard errors
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double n = static_cast<double>(v.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

double sample_var(double sum, double sum2, double n) {
  const double m = sum / n;
  return std::max(0.0, (sum2 - n * m * m) / (n - 1.0));
}

double sample_cov(double sa, double sb, double sab, double n) {
  return (sab - sa * sb / n) / (n - 1.0);
}

RunResult run(const EquilibriumReport& eqr, const ValidatedParams& vp,
              const SimConfig& cfg, const std::vector<Deviation>& arms) {
  const ModelParams& p = vp.get();
  const FeedbackPolicy& policy = *eqr.policy;
  const MomentTrajectory& traj = *eqr.moments;
  validate_sim_config(cfg, policy.grid());

  const int n = cfg.n_time_steps;
  const long N = cfg.n_paths;
  const int stride = policy.grid().n_steps() / n;
  const double dt = p.T / n;
  const double sqdt = std::sqrt(dt);
  const double gr = p.gamma * p.rho_c;
  const int A = static_cast<int>(arms.size());

  std::vector<NodeCoeffs> nc(n + 1);
  for (int i = 0; i <= n; ++i) {
    const int j = i * stride;
    const double t = policy.grid().node(j);
    nc[i] = {policy.producer(t), policy.consumer(t), policy.z_star().at(j),
             policy.y_star().at(j), traj.qbar(j), traj.cbar(j),
             traj.expected_spot[j]};
  }
  std::vector<ArmState> shifts;
  for (const auto& d : arms) shifts.push_back(shift_for(d));

  const int check_nodes[3] = {n / 4, n / 2, n};

  const long n_blocks = (N + kBlock - 1) / kBlock;
  const int slots = kEqSlots + 2 * A;
  std::vector<double> block_sums(static_cast<size_t>(n_blocks) * (n + 1) * slots, 0.0);

  // Per-path outputs.
  enum Term { kProfit, kDrift, kVol, kContract, kTerms };
  std::vector<double> P_p(N), P_c(N);
  std::vector<double> terms_p(N * kTerms), terms_c(N * kTerms);
  std::vector<double> arm_P(static_cast<size_t>(A) * N);
  std::vector<double> check_q(3 * N), check_c(3 * N);

  auto do_block = [&](long b) {
    const long first = b * kBlock;
    const long m = std::min(kBlock, N - first);
    double* sums = &block_sums[static_cast<size_t>(b) * (n + 1) * slots];

    std::vector<double> q(m, p.q0), c(m, p.c0), qa(static_cast<size_t>(A) * m, p.q0);
    std::vector<double> tp(m * kTerms, 0.0), tc(m * kTerms, 0.0);
    std::vector<double> pa(static_cast<size_t>(A) * m * kContract, 0.0);
    std::vector<double> u(m), v(m), ua(static_cast<size_t>(A) * m);

    for (int i = 0; i <= n; ++i) {
      const NodeCoeffs& k = nc[i];
      const double w = (i == 0 || i == n) ? 0.5 * dt : dt;
      double* s = sums + static_cast<size_t>(i) * slots;

      for (long r = 0; r < m; ++r) {
        const double S = p.s0 - p.rho_p * q[r] + gr * c[r];
        u[r] = k.gp.drift(q[r], c[r], k.qbar, k.cbar);
        v[r] = k.gc.drift(c[r], q[r], k.cbar, k.qbar);

        tp[r * kTerms + kProfit] += w * q[r] * S;
        tp[r * kTerms + kDrift] += w * 0.5 * p.k_p * u[r] * u[r];
        tp[r * kTerms + kVol] += w * 0.5 * p.l_p * (k.z - p.sigma_p) * (k.z - p.sigma_p);
        tc[r * kTerms + kProfit] +=
            w * (c[r] * (p.p0 + p.p1 * S) - p.gamma * c[r] * (S + p.delta));
        tc[r * kTerms + kDrift] += w * 0.5 * p.k_c * v[r] * v[r];
        tc[r * kTerms + kVol] += w * 0.5 * p.l_c * (k.y - p.sigma_c) * (k.y - p.sigma_c);

        const double dq = q[r] - k.qbar, dc = c[r] - k.cbar, ds = S - k.spot;
        s[kDq] += dq;
        s[kDc] += dc;
        s[kDq2] += dq * dq;
        s[kDc2] += dc * dc;
        s[kDqc] += dq * dc;
        s[kDs] += ds;
        s[kDs2] += ds * ds;

        for (int a = 0; a < A; ++a) {
          const size_t ar = static_cast<size_t>(a) * m + r;
          const PlayerGains g = shifted(k.gp, shifts[a].gp_shift);
          const double za = k.z + shifts[a].z_shift;
          const double Sa = p.s0 - p.rho_p * qa[ar] + gr * c[r];
          ua[ar] = g.drift(qa[ar], c[r], k.qbar, k.cbar);
          double* ta = &pa[ar * kContract];
          ta[kProfit] += w * qa[ar] * Sa;
          ta[kDrift] += w * 0.5 * p.k_p * ua[ar] * ua[ar];
          ta[kVol] += w * 0.5 * p.l_p * (za - p.sigma_p) * (za - p.sigma_p);
          const double dsa = Sa - k.spot;
          s[kEqSlots + 2 * a] += dsa;
          s[kEqSlots + 2 * a + 1] += dsa * dsa;
        }
      }

      for (int ci = 0; ci < 3; ++ci) {
        if (check_nodes[ci] != i) continue;
        for (long r = 0; r < m; ++r) {
          check_q[ci * N + first + r] = q[r];
          check_c[ci * N + first + r] = c[r];
        }
      }

      if (i == n) break;
      for (long r = 0; r < m; ++r) {
        const auto xi = normal_pair(cfg.seed, static_cast<std::uint64_t>(i),
                                    static_cast<std::uint64_t>(first + r));
        const double dW = sqdt * xi[0], dB = sqdt * xi[1];
        for (int a = 0; a < A; ++a) {
          const size_t ar = static_cast<size_t>(a) * m + r;
          qa[ar] += ua[ar] * dt + (k.z + shifts[a].z_shift) * dW;
        }
        q[r] += u[r] * dt + k.z * dW;
        c[r] += v[r] * dt + k.y * dB;
      }
    }

    for (long r = 0; r < m; ++r) {
      const double ST = p.s0 - p.rho_p * q[r] + gr * c[r];
      tp[r * kTerms + kContract] = p.F - p.lambda * ST;
      tc[r * kTerms + kContract] = -p.F + p.lambda * ST;
      const long g = first + r;
      P_p[g] = tp[r * kTerms + kProfit] - tp[r * kTerms + kDrift] -
               tp[r * kTerms + kVol] + tp[r * kTerms + kContract];
      P_c[g] = tc[r * kTerms + kProfit] - tc[r * kTerms + kDrift] -
               tc[r * kTerms + kVol] + tc[r * kTerms + kContract];
      for (int t = 0; t < kTerms; ++t) {
        terms_p[g * kTerms + t] = tp[r * kTerms + t];
        terms_c[g * kTerms + t] = tc[r * kTerms + t];
      }
      for (int a = 0; a < A; ++a) {
        const size_t ar = static_cast<size_t>(a) * m + r;
        const double Sa = p.s0 - p.rho_p * qa[ar] + gr * c[r];
        const double* ta = &pa[ar * kContract];
        arm_P[static_cast<size_t>(a) * N + g] =
            ta[kProfit] - ta[kDrift] - ta[kVol] + (p.F - p.lambda * Sa);
      }
    }
  };

  int workers = cfg.n_threads > 0 ? cfg.n_threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp<int>(workers, 1, static_cast<int>(n_blocks));
  std::atomic<long> next{0};
  auto worker = [&] {
    for (long b; (b = next.fetch_add(1)) < n_blocks;) do_block(b);
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Fixed-order reduction over blocks.
  std::vector<double> sums(static_cast<size_t>(n + 1) * slots, 0.0);
  for (long b = 0; b < n_blocks; ++b)
    for (size_t k = 0; k < sums.size(); ++k)
      sums[k] += block_sums[static_cast<size_t>(b) * sums.size() + k];

  const double Nd = static_cast<double>(N);
  RunResult out;
  McEstimate& est = out.eq;
  std::vector<double> vS(n + 1), vq(n + 1), vc(n + 1), cqc(n + 1);
  std::vector<std::vector<double>> vSa(A, std::vector<double>(n + 1));
  est.nodes.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double* s = &sums[static_cast<size_t>(i) * slots];
    vq[i] = sample_var(s[kDq], s[kDq2], Nd);
    vc[i] = sample_var(s[kDc], s[kDc2], Nd);
    cqc[i] = sample_cov(s[kDq], s[kDc], s[kDqc], Nd);
    vS[i] = sample_var(s[kDs], s[kDs2], Nd);
    for (int a = 0; a < A; ++a)
      vSa[a][i] = sample_var(s[kEqSlots + 2 * a], s[kEqSlots + 2 * a + 1], Nd);
    est.nodes[i] = {i * dt, nc[i].qbar + s[kDq] / Nd, nc[i].cbar + s[kDc] / Nd,
                    vq[i], vc[i], cqc[i], vS[i]};
  }
  const TimeGrid sim_grid(p.T, n);
  est.int_var_S = trapezoid(sim_grid, vS);
  est.int_var_q = trapezoid(sim_grid, vq);
  est.int_var_c = trapezoid(sim_grid, vc);
  est.int_cov_qc = trapezoid(sim_grid, cqc);

  const double l2 = p.lambda * p.lambda;
  est.J_p_hat = mean_of(P_p) - p.eta_p * l2 * est.int_var_S;
  est.J_c_hat = mean_of(P_c) - p.eta_c * l2 * est.int_var_S;
  est.se_p = se_of(P_p);
  est.se_c = se_of(P_c);

  auto term_mean = [&](const std::vector<double>& t, int which) {
    double s = 0.0;
    for (long g = 0; g < N; ++g) s += t[g * kTerms + which];
    return s / Nd;
  };
  est.terms_p = {term_mean(terms_p, kProfit), term_mean(terms_p, kDrift),
                 term_mean(terms_p, kVol), term_mean(terms_p, kContract),
                 p.eta_p * l2 * est.int_var_S};
  est.terms_c = {term_mean(terms_c, kProfit), term_mean(terms_c, kDrift),
                 term_mean(terms_c, kVol), term_mean(terms_c, kContract),
                 p.eta_c * l2 * est.int_var_S};

  for (int ci = 0; ci < 3; ++ci) {
    const int i = check_nodes[ci];
    const int j = i * stride;
    const double* qs = &check_q[ci * N];
    const double* cs = &check_c[ci * N];
    const double qb = traj.qbar(j), cb = traj.cbar(j);
    const double ode[5] = {qb, cb, traj.eq2(j), traj.ec2(j), traj.eqc(j)};
    const char* names[5] = {"qbar", "cbar", "Eq2", "Ec2", "Eqc"};
    for (int k = 0; k < 5; ++k) {
      // Sample of the quantity, shifted by its ODE value for accuracy.
      std::vector<double> x(N);
      for (long g = 0; g < N; ++g) {
        const double a = qs[g], b = cs[g];
        const double val[5] = {a, b, a * a, b * b, a * b};
        x[g] = val[k] - ode[k];
      }
      est.moment_checks.push_back(
          {i * dt, names[k], ode[k] + mean_of(x), ode[k], se_of(x)});
    }
  }

  for (int a = 0; a < A; ++a) {
    std::vector<double> d(N);
    for (long g = 0; g < N; ++g) d[g] = arm_P[static_cast<size_t>(a) * N + g] - P_p[g];
    const double int_vSa = trapezoid(sim_grid, vSa[a]);
    out.arm_delta.push_back(mean_of(d) - p.eta_p * l2 * (int_vSa - est.int_var_S));
    out.arm_se.push_back(se_of(d));
    out.arm_J.push_back(est.J_p_hat + out.arm_delta.back());
  }
  return out;
}

}  // namespace

const char* target_name(Deviation::Target t) {
  switch (t) {
    case Deviation::Target::kOwnDev: return "own_dev";
    case Deviation::Target::kOtherDev: return "other_dev";
    case Deviation::Target::kOwnMean: return "own_mean";
    case Deviation::Target::kOtherMean: return "other_mean";
    case Deviation::Target::kConstant: return "constant";
    case Deviation::Target::kVolatility: return "z";
  }
  return "?";
}

Deviation::Target parse_target(const std::string& name) {
  if (name == "own_dev") return Deviation::Target::kOwnDev;
  if (name == "other_dev") return Deviation::Target::kOtherDev;
  if (name == "own_mean" || name == "qbar_gain") return Deviation::Target::kOwnMean;
  if (name == "other_mean") return Deviation::Target::kOtherMean;
  if (name == "constant") return Deviation::Target::kConstant;
  if (name == "z") return Deviation::Target::kVolatility;
  throw std::invalid_argument("unknown deviation target '" + name + "'");
}

void validate_sim_config(const SimConfig& cfg, const TimeGrid& riccati_grid) {
  if (cfg.n_paths < 2) throw std::invalid_argument("n_paths must be at least 2");
  if (cfg.n_time_steps < 1) throw std::invalid_argument("n_time_steps must be positive");
  if (riccati_grid.n_steps() % cfg.n_time_steps != 0)
    throw std::invalid_argument("n_time_steps (" + std::to_string(cfg.n_time_steps) +
                                ") must divide the solver grid's n_steps (" +
                                std::to_string(riccati_grid.n_steps()) + ")");
}

McEstimate simulate_equilibrium(const EquilibriumReport& eq, const ValidatedParams& p,
                                const SimConfig& cfg) {
  std::vector<Deviation> arms;
  if (cfg.deviation) arms.push_back(*cfg.deviation);
  RunResult r = run(eq, p, cfg, arms);
  if (cfg.deviation) {
    r.eq.J_p_deviated = r.arm_J[0];
    r.eq.delta_J_p = r.arm_delta[0];
    r.eq.delta_se = r.arm_se[0];
  }
  return std::move(r.eq);
}

std::vector<DeviationRow> deviation_test(const EquilibriumReport& eq,
                                         const ValidatedParams& p, const SimConfig& cfg,
                                         const std::vector<Deviation>& arms) {
  const RunResult r = run(eq, p, cfg, arms);
  std::vector<DeviationRow> rows;
  for (size_t a = 0; a < arms.size(); ++a)
    rows.push_back({arms[a], r.arm_delta[a], r.arm_se[a]});
  return rows;
}

bool BandCheck::pass() const {
  const double gap = std::abs(estimate - reference);
  if (se > 0.0) return gap <= width * se;
  return gap <= 1e-9 * (1.0 + std::abs(reference));
}

std::vector<BandCheck> acceptance_bands(const McEstimate& mc, const EquilibriumReport& eq) {
  std::vector<BandCheck> out = {
      {"J_p", mc.J_p_hat, eq.J_p_star, mc.se_p, 3.0},
      {"J_c", mc.J_c_hat, eq.J_c_star, mc.se_c, 3.0},
  };
  for (const auto& m : mc.moment_checks)
    out.push_back({m.quantity + "@t=" + format_double(m.t), m.empirical, m.ode, m.se, 4.0});
  return out;
}

void write_estimate_text(std::ostream& out, const McEstimate& mc) {
  const auto line = [&](const std::string& key, double v) {
    out << key << std::string(24 - std::min<size_t>(23, key.size()), ' ')
        << format_double(v) << '\n';
  };
  line("J_p_hat", mc.J_p_hat);
  line("se_p", mc.se_p);
  line("J_c_hat", mc.J_c_hat);
  line("se_c", mc.se_c);
  line("p.profit", mc.terms_p.profit);
  line("p.drift_cost", mc.terms_p.drift_cost);
  line("p.volatility_cost", mc.terms_p.volatility_cost);
  line("p.contract", mc.terms_p.contract);
  line("p.variance_penalty", mc.terms_p.variance_penalty);
  line("c.profit", mc.terms_c.profit);
  line("c.drift_cost", mc.terms_c.drift_cost);
  line("c.volatility_cost", mc.terms_c.volatility_cost);
  line("c.contract", mc.terms_c.contract);
  line("c.variance_penalty", mc.terms_c.variance_penalty);
  line("int_var_S", mc.int_var_S);
  if (mc.delta_J_p) {
    line("J_p_deviated", *mc.J_p_deviated);
    line("delta_J_p", *mc.delta_J_p);
    line("delta_se", *mc.delta_se);
  }
}

void write_estimate_csv(std::ostream& out, const McEstimate& mc) {
  out << "player,J_hat,se,profit,drift_cost,volatility_cost,contract,variance_penalty\n";
  const auto row = [&](const char* who, double J, double se, const TermBreakdown& t) {
    out << who;
    for (double v : {J, se, t.profit, t.drift_cost, t.volatility_cost, t.contract,
                     t.variance_penalty})
      out << ',' << format_double(v);
    out << '\n';
  };
  row("producer", mc.J_p_hat, mc.se_p, mc.terms_p);
  row("consumer", mc.J_c_hat, mc.se_c, mc.terms_c);
}

}  // namespace mvcg
