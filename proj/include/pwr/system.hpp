#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pwr/distribution.hpp"

namespace pwr {

struct TimeGrid {
  double t0 = 0.0;
  double horizon = 1.0;
  std::size_t steps = 500;

  double h() const { return horizon / static_cast<double>(steps); }
  double at(std::size_t k) const {
    return steps == 0 ? t0 : t0 + horizon * static_cast<double>(k) / static_cast<double>(steps);
  }
  std::size_t points() const { return steps + 1; }
};

// Pointwise output z(t) = G(x(t), xi, t).
struct Observable {
  std::string name;
  std::function<double(const double* x, const double* xi, double t)> eval;
};

struct NetworkSystem {
  enum class Kind { ode, algebraic };

  // out[k] = f_{rows[k]}(x, xi, t); the residual for algebraic systems
  using RowsFn = std::function<void(std::span<const std::size_t> rows, const double* x, const double* xi, double t,
                                    double* out)>;
  using JacobianFn = std::function<void(const double* x, const double* xi, double t, Eigen::MatrixXd& jac)>;

  std::string name;
  Kind kind = Kind::ode;
  std::size_t n = 0;
  ParameterSpace params;
  std::vector<double> x0;
  double horizon = 1.0;
  std::size_t steps = 500;
  RowsFn rhs_rows;
  JacobianFn jacobian;  // optional
  std::vector<Observable> observables;

  void rhs(const double* x, const double* xi, double t, double* dx) const;
  // analytic when available, else central differences with relative step 1e-6
  Eigen::MatrixXd jacobian_at(const double* x, const double* xi, double t) const;
  Eigen::MatrixXd jacobian_fd(const double* x, const double* xi, double t) const;
  TimeGrid time_grid() const { return TimeGrid{0.0, horizon, steps}; }
  void validate() const;
};

// Samples on a uniform grid with stored derivatives for cubic Hermite dense output.
struct Trajectory {
  TimeGrid grid;
  Eigen::MatrixXd x;   // points x n
  Eigen::MatrixXd dx;  // points x n

  void interpolate(double t, double* out) const;
};

// Value of the cubic Hermite interpolant at the midpoint of [x0, x1].
inline double hermite_mid(double x0, double x1, double d0, double d1, double h) {
  return 0.5 * (x0 + x1) + 0.125 * h * (d0 - d1);
}

// Classical RK4 for a block of d unknowns. The callback receives the step index
// and stage (0: t_n, 1 and 2: midpoint, 3: t_{n+1}) so that it can supply
// external waveforms at exactly the matching dense-output point.
using BlockRhs = std::function<void(std::size_t step, int stage, double t, const double* y, double* dy)>;
void rk4_block(const TimeGrid& grid, std::size_t d, const double* y0, const BlockRhs& f, Eigen::MatrixXd& y,
               Eigen::MatrixXd& dy);

Trajectory integrate(const NetworkSystem& sys, const double* xi, const TimeGrid& grid);
Trajectory integrate(const NetworkSystem& sys, const double* xi);

// ODE: integrate over the system grid. Algebraic: a one-point trajectory holding
// the equilibrium reached from x0.
Trajectory solve_sample(const NetworkSystem& sys, const double* xi);

// Newton on the full residual: tolerance 1e-12, at most 50 iterations.
std::vector<double> solve_equilibrium(const NetworkSystem& sys, const double* xi, const std::vector<double>& guess);

// Newton on the rows listed, holding every other entry of x fixed. x is updated in place.
void solve_block(const NetworkSystem& sys, std::span<const std::size_t> rows, const double* xi, double* x);

// Observable values over a trajectory: points x observables.
Eigen::MatrixXd eval_observables(const NetworkSystem& sys, const Trajectory& traj, const double* xi);

}  // namespace pwr
