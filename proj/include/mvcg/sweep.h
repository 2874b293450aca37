// Two-axis parameter sweeps of the agreement quantities, written as CSV
// level-line data (row-major: axis1 outer, axis2 inner).

#ifndef MVCG_SWEEP_H
#define MVCG_SWEEP_H

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mvcg/equilibrium.h"
#include "mvcg/model.h"
#include "mvcg/pricing.h"

namespace mvcg {

struct SweepAxis {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  int n_points = 2;
  bool log_spacing = false;

  std::vector<double> values() const;
};

enum class SweepQuantity { kFStar, kLambdaStar, kUnitPrice, kPremium, kJpAtAgreement };

const char* quantity_name(SweepQuantity q);

struct SweepSpec {
  SweepAxis axis1;
  SweepAxis axis2;
  std::vector<std::pair<std::string, double>> fixed;
  std::string base_config;  // resolved path, may be empty
  std::string output;
  std::vector<SweepQuantity> quantities;
  Bracket bracket;
  SolverSettings settings;
  int n_threads = 0;
};

// Keys: base, out, axis1, axis2 ("name lo hi n [linear|log]"), quantities
// (comma list), bracket ("lo hi"), steps, threads, fixed.<param>.
// Throws ConfigError.
SweepSpec parse_sweep_spec(std::string_view text, const std::string& source_dir = ".");
SweepSpec read_sweep_spec(const std::string& path);

struct SweepPoint {
  double x1 = 0.0;
  double x2 = 0.0;
  std::string status;  // ok, MultipleRoots, Degenerate, BlowUp, A2Violation,
                       // NoSignChange, ConstraintViolation
  AgreementResult result;
  double J_p_at_agreement = 0.0;
  bool has_values() const;
};

// Never throws for per-point failures; the point carries the status.
std::vector<SweepPoint> run_sweep(const SweepSpec& spec, const ModelParams& base);

void write_sweep_csv(std::ostream& out, const SweepSpec& spec,
                     const std::vector<SweepPoint>& points);

}  // namespace mvcg

#endif  // MVCG_SWEEP_H
