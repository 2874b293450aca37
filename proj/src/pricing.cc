#include "mvcg/pricing.h"

#include <cmath>

#include "mvcg/grid.h"
#include "mvcg/riccati.h"

namespace mvcg {

namespace {

constexpr int kScanPoints = 64;
constexpr double kRelativeWidth = 1e-10;
constexpr int kMaxBisections = 200;

int sign(double x) { return (x > 0) - (x < 0); }

}  // namespace

SolveFailure::SolveFailure(std::string kind, double lambda, const std::string& what)
    : std::runtime_error(kind + " at lambda = " + format_double(lambda) + ": " + what),
      kind_(std::move(kind)),
      lambda_(lambda) {}

NoSignChange::NoSignChange(Bracket b, double g_lo, double g_hi)
    : std::runtime_error("F_c - F_p keeps its sign on [" + format_double(b.lo) +
                         ", " + format_double(b.hi) + "]: g(lo) = " +
                         format_double(g_lo) + ", g(hi) = " + format_double(g_hi)),
      bracket_(b),
      g_lo_(g_lo),
      g_hi_(g_hi) {}

PricingContext::PricingContext(const ValidatedParams& p, SolverSettings settings)
    : params_(p), settings_(settings), baseline_() {
  baseline_ = solve(0.0, 0.0);
}

EquilibriumReport PricingContext::solve(double lambda, double F) const {
  try {
    return solve_equilibrium(params_.with_contract(lambda, F), settings_);
  } catch (const BlowUp& e) {
    throw SolveFailure("BlowUp", lambda, e.what());
  } catch (const A2Violation& e) {
    throw SolveFailure("A2Violation", lambda, e.what());
  }
}

IndifferencePrices PricingContext::prices(const EquilibriumReport& r) const {
  return {r.lambda, baseline_.J_p_star - r.J_p_star, r.J_c_star - baseline_.J_c_star};
}

IndifferencePrices PricingContext::prices(double lambda) const {
  if (lambda == 0.0) return {0.0, 0.0, 0.0};
  return prices(solve(lambda, 0.0));
}

IndifferencePrices indifference_prices(const ValidatedParams& p, double lambda,
                                       const SolverSettings& settings) {
  return PricingContext(p, settings).prices(lambda);
}

AgreementResult find_lambda_star(const ValidatedParams& p, Bracket search,
                                 const SolverSettings& settings) {
  return find_lambda_star(PricingContext(p, settings), search);
}

AgreementResult find_lambda_star(const PricingContext& ctx, Bracket search) {
  if (!(search.lo >= 1e-3) || !(search.hi > search.lo) || !std::isfinite(search.hi))
    throw std::invalid_argument("lambda bracket needs 1e-3 <= lo < hi");

  const auto tolerance = [](const IndifferencePrices& x) {
    return 1e-8 * (1.0 + std::abs(x.F_c));
  };

  std::vector<double> lam(kScanPoints);
  std::vector<IndifferencePrices> val(kScanPoints);
  const double ratio = std::log(search.hi / search.lo) / (kScanPoints - 1);
  for (int i = 0; i < kScanPoints; ++i) {
    lam[i] = i == kScanPoints - 1 ? search.hi : search.lo * std::exp(ratio * i);
    val[i] = ctx.prices(lam[i]);
  }

  AgreementResult res;
  res.bracket_used = search;
  res.expected_spot_T_no_contract = ctx.baseline().expected_spot_T;

  bool all_small = true;
  for (const auto& v : val) all_small = all_small && std::abs(v.g()) <= tolerance(v);
  if (all_small) {
    const EquilibriumReport r = ctx.solve(lam.front());
    const IndifferencePrices x = ctx.prices(r);
    res.degenerate = true;
    res.lambda_star = lam.front();
    res.F_star = x.F_p;
    res.F_c_star = x.F_c;
    res.residual = std::abs(x.g());
    res.tolerance = tolerance(x);
    res.unit_price = x.F_p / res.lambda_star;
    res.expected_spot_T = r.expected_spot_T;
    res.risk_premium = res.unit_price - res.expected_spot_T;
    res.warnings.push_back("price agreement for all lambda in the bracket");
    return res;
  }

  int first = -1;
  for (int i = 0; i + 1 < kScanPoints; ++i) {
    const int a = sign(val[i].g()), b = sign(val[i + 1].g());
    if (a == 0 || a * b < 0) {
      res.sign_changes.emplace_back(lam[i], lam[i + 1]);
      if (first < 0) first = i;
    }
  }
  if (sign(val.back().g()) == 0 && res.sign_changes.empty()) {
    res.sign_changes.emplace_back(lam[kScanPoints - 2], lam.back());
    first = kScanPoints - 2;
  }
  if (first < 0) throw NoSignChange(search, val.front().g(), val.back().g());
  if (res.sign_changes.size() > 1) {
    std::string msg = "multiple roots; brackets:";
    for (const auto& [a, b] : res.sign_changes)
      msg += " [" + format_double(a) + ", " + format_double(b) + "]";
    res.warnings.push_back(msg);
  }

  double a = lam[first], b = lam[first + 1];
  double ga = val[first].g();
  double root = sign(ga) == 0 ? a : 0.5 * (a + b);
  if (sign(ga) != 0) {
    for (int it = 0; it < kMaxBisections; ++it) {
      const double mid = 0.5 * (a + b);
      const IndifferencePrices x = ctx.prices(mid);
      root = mid;
      const bool narrow = (b - a) <= kRelativeWidth * mid;
      if (sign(x.g()) == 0 || (narrow && std::abs(x.g()) <= tolerance(x))) break;
      if (sign(x.g()) == sign(ga)) {
        a = mid;
        ga = x.g();
      } else {
        b = mid;
      }
    }
  }

  const EquilibriumReport r = ctx.solve(root);
  const IndifferencePrices x = ctx.prices(r);
  res.lambda_star = root;
  res.F_star = x.F_p;
  res.F_c_star = x.F_c;
  res.residual = std::abs(x.g());
  res.tolerance = tolerance(x);
  res.unit_price = x.F_p / root;
  res.expected_spot_T = r.expected_spot_T;
  res.risk_premium = res.unit_price - res.expected_spot_T;
  if (res.residual > res.tolerance)
    res.warnings.push_back("residual " + format_double(res.residual) +
                           " exceeds tolerance " + format_double(res.tolerance));
  return res;
}

double agreement_invariant(const ValidatedParams& p, const EquilibriumReport& r) {
  return 2.0 * r.h1_0 * p->q0 + 2.0 * r.h2_0 * p->c0 + r.R_c0 + r.R_p0;
}

PremiumRow risk_premium_report(const AgreementResult& res, const ValidatedParams& p) {
  return {p->eta_p,        p->eta_c,   p->l_p,          p->l_c,
          res.lambda_star, res.F_star, res.unit_price, res.expected_spot_T,
          res.risk_premium};
}

std::string premium_csv_header() {
  return "eta_p,eta_c,l_p,l_c,lambda_star,F_star,unit_price,expected_spot_T,premium";
}

std::string premium_csv_row(const PremiumRow& r) {
  std::string out;
  for (double v : {r.eta_p, r.eta_c, r.l_p, r.l_c, r.lambda_star, r.F_star,
                   r.unit_price, r.expected_spot_T, r.premium}) {
    if (!out.empty()) out += ',';
    out += format_double(v);
  }
  return out;
}

void write_agreement_text(std::ostream& out, const AgreementResult& res) {
  const auto line = [&](const std::string& key, const std::string& v) {
    out << key << std::string(30 - key.size(), ' ') << v << '\n';
  };
  const auto num = [&](const std::string& key, double v) { line(key, format_double(v)); };
  num("lambda_star", res.lambda_star);
  num("F_star", res.F_star);
  num("F_c_at_lambda_star", res.F_c_star);
  num("unit_price", res.unit_price);
  num("expected_spot_T", res.expected_spot_T);
  num("expected_spot_T_no_contract", res.expected_spot_T_no_contract);
  num("risk_premium", res.risk_premium);
  num("residual", res.residual);
  num("tolerance", res.tolerance);
  line("bracket", "[" + format_double(res.bracket_used.lo) + ", " +
                      format_double(res.bracket_used.hi) + "]");
  line("degenerate", res.degenerate ? "true" : "false");
  for (const auto& w : res.warnings) line("warning", w);
}

}  // namespace mvcg
