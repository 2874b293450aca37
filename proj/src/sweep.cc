#include "mvcg/sweep.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

#include "mvcg/config.h"
#include "mvcg/grid.h"
#include "mvcg/riccati.h"

namespace mvcg {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

SweepAxis parse_axis(const std::string& key, const std::string& value) {
  const auto w = words(value);
  if (w.size() != 4 && w.size() != 5)
    throw ConfigError(key + ": expected 'name lo hi n [linear|log]'");
  SweepAxis a;
  a.name = w[0];
  if (!find_param_field(a.name))
    throw ConfigError(key + ": unknown parameter '" + a.name + "'");
  a.lo = parse_double(w[1]);
  a.hi = parse_double(w[2]);
  const double n = parse_double(w[3]);
  if (n != std::floor(n) || n < 2 || n > 1e6)
    throw ConfigError(key + ": n_points must be an integer >= 2");
  a.n_points = static_cast<int>(n);
  if (w.size() == 5) {
    if (w[4] == "log") a.log_spacing = true;
    else if (w[4] != "linear") throw ConfigError(key + ": spacing must be linear or log");
  }
  if (a.log_spacing && !(a.lo > 0 && a.hi > 0))
    throw ConfigError(key + ": log spacing needs positive bounds");
  return a;
}

SweepQuantity parse_quantity(const std::string& s) {
  for (auto q : {SweepQuantity::kFStar, SweepQuantity::kLambdaStar,
                 SweepQuantity::kUnitPrice, SweepQuantity::kPremium,
                 SweepQuantity::kJpAtAgreement})
    if (s == quantity_name(q)) return q;
  throw ConfigError("unknown sweep quantity '" + s + "'");
}

double quantity_value(const SweepPoint& p, SweepQuantity q) {
  switch (q) {
    case SweepQuantity::kFStar: return p.result.F_star;
    case SweepQuantity::kLambdaStar: return p.result.lambda_star;
    case SweepQuantity::kUnitPrice: return p.result.unit_price;
    case SweepQuantity::kPremium: return p.result.risk_premium;
    case SweepQuantity::kJpAtAgreement: return p.J_p_at_agreement;
  }
  return 0.0;
}

void solve_point(SweepPoint& pt, const SweepSpec& spec, ModelParams params) {
  params.*find_param_field(spec.axis1.name)->member = pt.x1;
  params.*find_param_field(spec.axis2.name)->member = pt.x2;
  try {
    const ValidatedParams vp = validate_params(params);
    const PricingContext ctx(vp.with_contract(0.0, 0.0), spec.settings);
    pt.result = find_lambda_star(ctx, spec.bracket);
    pt.J_p_at_agreement =
        ctx.solve(pt.result.lambda_star, pt.result.F_star).J_p_star;
    pt.status = pt.result.degenerate                ? "Degenerate"
                : pt.result.sign_changes.size() > 1 ? "MultipleRoots"
                                                    : "ok";
  } catch (const ConstraintViolation&) {
    pt.status = "ConstraintViolation";
  } catch (const SolveFailure& e) {
    pt.status = e.kind();
  } catch (const NoSignChange&) {
    pt.status = "NoSignChange";
  }
}

}  // namespace

std::vector<double> SweepAxis::values() const {
  std::vector<double> v(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double f = static_cast<double>(i) / (n_points - 1);
    if (i == 0) v[i] = lo;
    else if (i == n_points - 1) v[i] = hi;
    else v[i] = log_spacing ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f;
  }
  return v;
}

const char* quantity_name(SweepQuantity q) {
  switch (q) {
    case SweepQuantity::kFStar: return "F_star";
    case SweepQuantity::kLambdaStar: return "lambda_star";
    case SweepQuantity::kUnitPrice: return "unit_price";
    case SweepQuantity::kPremium: return "premium";
    case SweepQuantity::kJpAtAgreement: return "J_p_star_at_agreement";
  }
  return "?";
}

SweepSpec parse_sweep_spec(std::string_view text, const std::string& source_dir) {
  const auto kv = parse_key_values(text, "sweep spec");
  SweepSpec s;
  bool have1 = false, have2 = false;
  for (const auto& [key, value] : kv) {
    if (key == "axis1") {
      s.axis1 = parse_axis(key, value);
      have1 = true;
    } else if (key == "axis2") {
      s.axis2 = parse_axis(key, value);
      have2 = true;
    } else if (key == "base") {
      s.base_config = (std::filesystem::path(source_dir) / value).string();
    } else if (key == "out") {
      s.output = value;
    } else if (key == "quantities") {
      for (const auto& q : split(value, ',')) s.quantities.push_back(parse_quantity(q));
    } else if (key == "bracket") {
      const auto w = words(value);
      if (w.size() != 2) throw ConfigError("bracket: expected 'lo hi'");
      s.bracket = {parse_double(w[0]), parse_double(w[1])};
      if (!(s.bracket.lo >= 1e-3 && s.bracket.lo < s.bracket.hi))
        throw ConfigError("bracket: need 1e-3 <= lo < hi");
    } else if (key == "steps") {
      s.settings.n_steps = static_cast<int>(parse_double(value));
    } else if (key == "threads") {
      s.n_threads = static_cast<int>(parse_double(value));
    } else if (key.rfind("fixed.", 0) == 0) {
      const std::string name = key.substr(6);
      if (!find_param_field(name))
        throw ConfigError("unknown parameter '" + name + "' in " + key);
      s.fixed.emplace_back(name, parse_double(value));
    } else {
      throw ConfigError("sweep spec: unknown key '" + key + "'");
    }
  }
  if (!have1 || !have2) throw ConfigError("sweep spec needs axis1 and axis2");
  if (s.axis1.name == s.axis2.name) throw ConfigError("sweep axes must differ");
  if (s.quantities.empty())
    s.quantities = {SweepQuantity::kFStar, SweepQuantity::kLambdaStar,
                    SweepQuantity::kUnitPrice, SweepQuantity::kPremium,
                    SweepQuantity::kJpAtAgreement};
  return s;
}

SweepSpec read_sweep_spec(const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_sweep_spec(read_file(path), dir.empty() ? "." : dir.string());
}

bool SweepPoint::has_values() const {
  return status == "ok" || status == "MultipleRoots" || status == "Degenerate";
}

std::vector<SweepPoint> run_sweep(const SweepSpec& spec, const ModelParams& base) {
  ModelParams params = base;
  for (const auto& [name, value] : spec.fixed) params.*find_param_field(name)->member = value;

  const auto v1 = spec.axis1.values();
  const auto v2 = spec.axis2.values();
  std::vector<SweepPoint> points;
  for (double a : v1)
    for (double b : v2) points.push_back({a, b, "", {}, 0.0});

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next.fetch_add(1)) < points.size();)
      solve_point(points[i], spec, params);
  };
  int workers = spec.n_threads > 0 ? spec.n_threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp<int>(workers, 1, static_cast<int>(points.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return points;
}

void write_sweep_csv(std::ostream& out, const SweepSpec& spec,
                     const std::vector<SweepPoint>& points) {
  out << spec.axis1.name << ',' << spec.axis2.name;
  for (auto q : spec.quantities) out << ',' << quantity_name(q);
  out << ",status\n";
  for (const auto& p : points) {
    out << format_double(p.x1) << ',' << format_double(p.x2);
    for (auto q : spec.quantities) {
      out << ',';
      if (p.has_values()) out << format_double(quantity_value(p, q));
    }
    out << ',' << p.status << '\n';
  }
}

}  // namespace mvcg
