// Command-line front end: solve, price, mc-validate, sweep.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mvcg/config.h"
#include "mvcg/equilibrium.h"
#include "mvcg/montecarlo.h"
#include "mvcg/pricing.h"
#include "mvcg/riccati.h"
#include "mvcg/sweep.h"

namespace {

using namespace mvcg;

constexpr int kConfigError = 1;
constexpr int kSolverError = 2;
constexpr int kMcFailure = 3;

struct ModelFlags {
  std::string config;
  std::optional<double> lambda, F, eta_p, eta_c, ell_p, ell_c;
  std::vector<std::string> sets;
  int steps = 2000;

  void attach(CLI::App* app, bool require_config = true) {
    auto* c = app->add_option("--config", config, "parameter file (name = value lines)");
    if (require_config) c->required();
    app->add_option("--lambda", lambda, "contract quantity");
    app->add_option("--F", F, "forward cash amount");
    app->add_option("--eta-p", eta_p, "producer risk aversion");
    app->add_option("--eta-c", eta_c, "consumer risk aversion");
    app->add_option("--ell-p", ell_p, "producer volatility cost");
    app->add_option("--ell-c", ell_c, "consumer volatility cost");
    app->add_option("--set", sets, "override any parameter, name=value");
    app->add_option("--steps", steps, "solver grid steps (even)")->check(CLI::PositiveNumber);
  }

  ModelParams load() const {
    ModelParams p = read_model_params(config);
    apply(p);
    return p;
  }

  void apply(ModelParams& p) const {
    if (lambda) p.lambda = *lambda;
    if (F) p.F = *F;
    if (eta_p) p.eta_p = *eta_p;
    if (eta_c) p.eta_c = *eta_c;
    if (ell_p) p.l_p = *ell_p;
    if (ell_c) p.l_c = *ell_c;
    for (const auto& s : sets) apply_override(p, s);
  }
};

std::ofstream open_out(const std::string& path, bool append = false) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

int run_solve(const ModelFlags& f, const std::string& out_path) {
  const ValidatedParams p = validate_params(f.load());
  const EquilibriumReport r = solve_equilibrium(p, {f.steps});
  write_report_text(std::cout, r);
  if (!out_path.empty()) {
    auto out = open_out(out_path);
    write_moments_csv(out, r);
  }
  return 0;
}

int run_price(const ModelFlags& f, const std::vector<double>& bracket,
              const std::string& out_path) {
  const ValidatedParams p = validate_params(f.load());
  Bracket b;
  if (!bracket.empty()) b = {bracket[0], bracket[1]};
  const AgreementResult res = find_lambda_star(p.with_contract(0.0, 0.0), b, {f.steps});
  write_agreement_text(std::cout, res);
  const PremiumRow row = risk_premium_report(res, p);
  std::cout << premium_csv_header() << '\n' << premium_csv_row(row) << '\n';
  if (!out_path.empty()) {
    const bool fresh = !std::ifstream(out_path).good() ||
                       std::ifstream(out_path).peek() == std::ifstream::traits_type::eof();
    auto out = open_out(out_path, true);
    if (fresh) out << premium_csv_header() << '\n';
    out << premium_csv_row(row) << '\n';
  }
  return 0;
}

int run_mc(const ModelFlags& f, bool indifference_F, SimConfig cfg,
           const std::vector<std::string>& deviation, const std::string& out_path) {
  ModelParams raw = f.load();
  if (indifference_F) {
    const ValidatedParams vp = validate_params(raw);
    raw.F = PricingContext(vp.with_contract(0.0, 0.0), {f.steps}).prices(raw.lambda).F_p;
  }
  const ValidatedParams p = validate_params(raw);
  if (!deviation.empty()) {
    Deviation d;
    try {
      d = {parse_target(deviation[0]), parse_double(deviation[1])};
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    cfg.deviation = d;
  }
  const EquilibriumReport eq = solve_equilibrium(p, {f.steps});
  try {
    validate_sim_config(cfg, eq.policy->grid());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const McEstimate mc = simulate_equilibrium(eq, p, cfg);

  std::cout << "F" << std::string(23, ' ') << format_double(p->F) << '\n';
  write_estimate_text(std::cout, mc);
  bool ok = true;
  std::cout << "\nband                  estimate                reference               "
               "se                      width  status\n";
  for (const auto& b : acceptance_bands(mc, eq)) {
    const auto pad = [](const std::string& s, size_t w) {
      return s + std::string(w > s.size() ? w - s.size() : 1, ' ');
    };
    std::cout << pad(b.name, 22) << pad(format_double(b.estimate), 24)
              << pad(format_double(b.reference), 24) << pad(format_double(b.se), 24)
              << pad(format_double(b.width), 7) << (b.pass() ? "PASS" : "FAIL") << '\n';
    ok = ok && b.pass();
  }
  if (!out_path.empty()) {
    auto out = open_out(out_path);
    write_estimate_csv(out, mc);
  }
  return ok ? 0 : kMcFailure;
}

int run_sweep_cmd(const std::string& spec_path, const ModelFlags& f,
                  const std::vector<double>& bracket, const std::string& out_path,
                  std::optional<int> steps, int threads) {
  SweepSpec spec = read_sweep_spec(spec_path);
  if (!bracket.empty()) spec.bracket = {bracket[0], bracket[1]};
  if (steps) spec.settings.n_steps = *steps;
  if (threads > 0) spec.n_threads = threads;
  if (!out_path.empty()) spec.output = out_path;
  const std::string base_path = f.config.empty() ? spec.base_config : f.config;
  if (base_path.empty()) throw ConfigError("sweep needs --config or a 'base' key");
  ModelParams base = read_model_params(base_path);
  f.apply(base);

  const auto points = run_sweep(spec, base);
  if (spec.output.empty()) {
    write_sweep_csv(std::cout, spec, points);
  } else {
    auto out = open_out(spec.output);
    write_sweep_csv(out, spec, points);
    size_t ok = 0;
    for (const auto& p : points) ok += p.has_values();
    std::cout << "wrote " << points.size() << " rows (" << ok << " solved) to "
              << spec.output << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Producer/consumer commodity game: equilibrium, forward pricing, "
               "Monte Carlo validation"};
  app.require_subcommand(1);

  ModelFlags solve_f, price_f, mc_f, sweep_f;
  std::string solve_out, price_out, mc_out, sweep_out, spec_path;
  std::vector<double> price_bracket, sweep_bracket;
  SimConfig sim;
  bool indifference_F = false;
  std::vector<std::string> deviation;
  std::optional<int> sweep_steps;
  int sweep_threads = 0;

  auto* solve = app.add_subcommand("solve", "solve the equilibrium and print the report");
  solve_f.attach(solve);
  solve->add_option("--out", solve_out, "write the moment trajectory CSV here");

  auto* price = app.add_subcommand("price", "find the agreement quantity and price");
  price_f.attach(price);
  price->add_option("--bracket", price_bracket, "lambda search bracket: lo hi")
      ->expected(2);
  price->add_option("--out", price_out, "append the premium row to this CSV");

  auto* mc = app.add_subcommand("mc-validate", "Monte Carlo check of the equilibrium");
  mc_f.attach(mc);
  mc->add_option("--paths", sim.n_paths, "number of paths")->check(CLI::Range(2L, 100000000L));
  mc->add_option("--mc-steps", sim.n_time_steps, "Euler steps (must divide --steps)")
      ->check(CLI::PositiveNumber);
  mc->add_option("--seed", sim.seed, "generator seed");
  mc->add_option("--threads", sim.n_threads, "worker threads (0: all cores)");
  mc->add_flag("--indifference-F", indifference_F,
               "set F to the producer's indifference price at --lambda");
  mc->add_option("--deviation", deviation,
                 "producer deviation: target epsilon (own_dev, other_dev, own_mean, "
                 "other_mean, constant, z)")
      ->expected(2);
  mc->add_option("--out", mc_out, "write the estimate CSV here");

  auto* sweep = app.add_subcommand("sweep", "two-axis sweep of the agreement quantities");
  sweep->add_option("--spec", spec_path, "sweep specification file")->required();
  sweep_f.attach(sweep, false);
  sweep->add_option("--bracket", sweep_bracket, "lambda search bracket: lo hi")->expected(2);
  sweep->add_option("--out", sweep_out, "output CSV (overrides the spec)");
  sweep->add_option("--threads", sweep_threads, "worker threads (0: all cores)");
  sweep->callback([&] {
    if (sweep->count("--steps")) sweep_steps = sweep_f.steps;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*solve) return run_solve(solve_f, solve_out);
    if (*price) return run_price(price_f, price_bracket, price_out);
    if (*mc) return run_mc(mc_f, indifference_F, sim, deviation, mc_out);
    if (*sweep)
      return run_sweep_cmd(spec_path, sweep_f, sweep_bracket, sweep_out, sweep_steps,
                           sweep_threads);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConstraintViolation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const GridParity& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const BlowUp& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolverError;
  } catch (const A2Violation& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolverError;
  } catch (const SolveFailure& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolverError;
  } catch (const NoSignChange& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolverError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}
