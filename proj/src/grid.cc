#include "mvcg/grid.h"

#include <cstdio>

namespace mvcg {

TimeGrid::TimeGrid(double T, int n_steps) : T_(T), n_(n_steps), h_(T / n_steps) {
  if (!(T > 0.0) || !std::isfinite(T))
    throw std::invalid_argument("time grid needs a positive horizon");
  if (n_steps < 1) throw std::invalid_argument("time grid needs n_steps >= 1");
}

int TimeGrid::cell(double t) const {
  const int i = static_cast<int>(std::floor(t / h_));
  return std::clamp(i, 0, n_ - 1);
}

BlowUp::BlowUp(double t)
    : std::runtime_error("Riccati solution blows up near t = " +
                         format_double(t)),
      t_(t) {}

GridParity::GridParity(int n_steps)
    : std::invalid_argument("Simpson quadrature needs an even number of steps, got " +
                            std::to_string(n_steps)) {}

double simpson(const TimeGrid& grid, const std::vector<double>& f) {
  const int n = grid.n_steps();
  if (n % 2 != 0) throw GridParity(n);
  if (static_cast<int>(f.size()) != grid.size())
    throw std::invalid_argument("integrand size does not match grid");
  double odd = 0.0, even = 0.0;
  for (int i = 1; i < n; i += 2) odd += f[i];
  for (int i = 2; i < n; i += 2) even += f[i];
  return grid.step() / 3.0 * (f[0] + 4.0 * odd + 2.0 * even + f[n]);
}

double trapezoid(const TimeGrid& grid, const std::vector<double>& f) {
  const int n = grid.n_steps();
  if (static_cast<int>(f.size()) != grid.size())
    throw std::invalid_argument("integrand size does not match grid");
  double inner = 0.0;
  for (int i = 1; i < n; ++i) inner += f[i];
  return grid.step() * (0.5 * (f[0] + f[n]) + inner);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

template <typename Row>
void dump(std::ostream& out, const TimeGrid& grid,
          const std::vector<std::string>& names, Row&& row) {
  out << 't';
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (int i = 0; i < grid.size(); ++i) {
    out << format_double(grid.node(i));
    for (double v : row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace

void write_csv(std::ostream& out, const GridFunction<double>& f,
               const std::string& name) {
  dump(out, f.grid(), {name},
       [&](int i) { return std::vector<double>{f.at(i)}; });
}

void write_csv(std::ostream& out, const GridFunction<Eigen::Vector2d>& f,
               const std::string& prefix) {
  dump(out, f.grid(), {prefix + "1", prefix + "2"}, [&](int i) {
    return std::vector<double>{f.at(i)(0), f.at(i)(1)};
  });
}

void write_csv(std::ostream& out, const GridFunction<Eigen::Matrix2d>& f,
               const std::string& prefix) {
  dump(out, f.grid(),
       {prefix + "11", prefix + "12", prefix + "21", prefix + "22"}, [&](int i) {
         const auto& m = f.at(i);
         return std::vector<double>{m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
       });
}

}  // namespace mvcg
