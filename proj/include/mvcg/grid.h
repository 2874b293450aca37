///////////////////////////////////////////////////////////////////////////////
//
// Uniform time grids, tabulated grid functions and the fixed-step RK4
// integrator shared by the Riccati and moment solvers.
//
// A GridFunction stores the value and the ODE right-hand side (the slope) at
// every node, so evaluation between nodes is a cubic Hermite interpolant of
// the same order as RK4.
//
///////////////////////////////////////////////////////////////////////////////

#ifndef MVCG_GRID_H
#define MVCG_GRID_H

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace mvcg {

class TimeGrid {
 public:
  TimeGrid(double T, int n_steps);

  int n_steps() const { return n_; }
  int size() const { return n_ + 1; }
  double horizon() const { return T_; }
  double step() const { return h_; }
  double node(int i) const { return i == n_ ? T_ : T_ * i / n_; }

  // Index i of the cell [t_i, t_{i+1}] containing t, clamped to the grid.
  int cell(double t) const;

  bool operator==(const TimeGrid& o) const { return T_ == o.T_ && n_ == o.n_; }
  bool operator!=(const TimeGrid& o) const { return !(*this == o); }

 private:
  double T_;
  int n_;
  double h_;
};

// Raised when an integrated entry exceeds kBlowUpThreshold in magnitude or
// stops being finite.
class BlowUp : public std::runtime_error {
 public:
  explicit BlowUp(double t);
  double time() const { return t_; }

 private:
  double t_;
};

inline constexpr double kBlowUpThreshold = 1e8;

inline double max_abs(double x) { return std::abs(x); }
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseAbs().maxCoeff();
}

inline bool all_finite(double x) { return std::isfinite(x); }
template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x) {
  return x.allFinite();
}

template <typename V>
V zero_like() {
  if constexpr (std::is_arithmetic_v<V>) {
    return V(0);
  } else {
    return V::Zero();
  }
}

template <typename V>
class GridFunction {
 public:
  GridFunction(TimeGrid grid, std::vector<V> values, std::vector<V> slopes)
      : grid_(grid), values_(std::move(values)), slopes_(std::move(slopes)) {
    if (static_cast<int>(values_.size()) != grid_.size() ||
        static_cast<int>(slopes_.size()) != grid_.size())
      throw std::invalid_argument("grid function size does not match grid");
  }

  const TimeGrid& grid() const { return grid_; }
  const V& at(int i) const { return values_[i]; }
  const V& slope(int i) const { return slopes_[i]; }
  const std::vector<V>& values() const { return values_; }

  V operator()(double t) const {
    const int i = grid_.cell(t);
    const double h = grid_.step();
    const double s = (t - grid_.node(i)) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return V(h00 * values_[i] + (h10 * h) * slopes_[i] +
             h01 * values_[i + 1] + (h11 * h) * slopes_[i + 1]);
  }

  // Derivative of the Hermite interpolant.
  V derivative(double t) const {
    const int i = grid_.cell(t);
    const double h = grid_.step();
    const double s = (t - grid_.node(i)) / h;
    const double s2 = s * s;
    const double d00 = (6 * s2 - 6 * s) / h;
    const double d10 = 3 * s2 - 4 * s + 1;
    const double d01 = (-6 * s2 + 6 * s) / h;
    const double d11 = 3 * s2 - 2 * s;
    return V(d00 * values_[i] + d10 * slopes_[i] + d01 * values_[i + 1] +
             d11 * slopes_[i + 1]);
  }

 private:
  TimeGrid grid_;
  std::vector<V> values_;
  std::vector<V> slopes_;
};

// Classical RK4 from t_n = T down to t_0 with y(T) = terminal. The guard
// raises BlowUp at the first step whose result is too large.
template <typename V, typename Rhs>
GridFunction<V> integrate_backward(const TimeGrid& grid, const V& terminal,
                                   Rhs&& rhs, bool guard = true) {
  const int n = grid.n_steps();
  const double h = grid.step();
  std::vector<V> y(n + 1, zero_like<V>()), dy(n + 1, zero_like<V>());
  y[n] = terminal;
  for (int i = n; i > 0; --i) {
    const double t = grid.node(i);
    const double tm = t - 0.5 * h;
    const V k1 = rhs(t, y[i]);
    const V k2 = rhs(tm, V(y[i] - 0.5 * h * k1));
    const V k3 = rhs(tm, V(y[i] - 0.5 * h * k2));
    const V k4 = rhs(grid.node(i - 1), V(y[i] - h * k3));
    dy[i] = k1;
    y[i - 1] = y[i] - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (guard && (!all_finite(y[i - 1]) || max_abs(y[i - 1]) > kBlowUpThreshold))
      throw BlowUp(grid.node(i - 1));
  }
  dy[0] = rhs(grid.node(0), y[0]);
  return GridFunction<V>(grid, std::move(y), std::move(dy));
}

template <typename V, typename Rhs>
GridFunction<V> integrate_forward(const TimeGrid& grid, const V& initial,
                                  Rhs&& rhs) {
  const int n = grid.n_steps();
  const double h = grid.step();
  std::vector<V> y(n + 1, zero_like<V>()), dy(n + 1, zero_like<V>());
  y[0] = initial;
  for (int i = 0; i < n; ++i) {
    const double t = grid.node(i);
    const double tm = t + 0.5 * h;
    const V k1 = rhs(t, y[i]);
    const V k2 = rhs(tm, V(y[i] + 0.5 * h * k1));
    const V k3 = rhs(tm, V(y[i] + 0.5 * h * k2));
    const V k4 = rhs(grid.node(i + 1), V(y[i] + h * k3));
    dy[i] = k1;
    y[i + 1] = y[i] + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  dy[n] = rhs(grid.node(n), y[n]);
  return GridFunction<V>(grid, std::move(y), std::move(dy));
}

// Composite Simpson over the grid nodes. Throws GridParity for odd n.
class GridParity : public std::invalid_argument {
 public:
  explicit GridParity(int n_steps);
};

double simpson(const TimeGrid& grid, const std::vector<double>& f);
double trapezoid(const TimeGrid& grid, const std::vector<double>& f);

// 17 significant digits, shortest form not attempted.
std::string format_double(double x);

// CSV with header `t,<names>`; one row per node.
void write_csv(std::ostream& out, const GridFunction<double>& f,
               const std::string& name);
void write_csv(std::ostream& out, const GridFunction<Eigen::Vector2d>& f,
               const std::string& prefix);
void write_csv(std::ostream& out, const GridFunction<Eigen::Matrix2d>& f,
               const std::string& prefix);

}  // namespace mvcg

#endif  // MVCG_GRID_H
