#include "pwr/system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pwr/error.hpp"

namespace pwr {

void NetworkSystem::rhs(const double* x, const double* xi, double t, double* dx) const {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  rhs_rows(rows, x, xi, t, dx);
}

Eigen::MatrixXd NetworkSystem::jacobian_fd(const double* x, const double* xi, double t) const {
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> xp(x, x + n), fp(n), fm(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double step = 1e-6 * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + step;
    rhs(xp.data(), xi, t, fp.data());
    xp[j] = x[j] - step;
    rhs(xp.data(), xi, t, fm.data());
    xp[j] = x[j];
    for (std::size_t i = 0; i < n; ++i)
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (fp[i] - fm[i]) / (2.0 * step);
  }
  return jac;
}

Eigen::MatrixXd NetworkSystem::jacobian_at(const double* x, const double* xi, double t) const {
  if (!jacobian) return jacobian_fd(x, xi, t);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  jacobian(x, xi, t, jac);
  return jac;
}

void NetworkSystem::validate() const {
  if (n == 0) throw Error(ErrorKind::invalid_argument, "system has no states");
  if (x0.size() != n) throw Error(ErrorKind::length_mismatch, "initial state length differs from state count");
  if (!rhs_rows) throw Error(ErrorKind::invalid_argument, "system has no right-hand side");
  if (kind == Kind::ode && (!(horizon > 0.0) || steps == 0))
    throw Error(ErrorKind::invalid_argument, "ODE system needs a positive horizon and step count");
  params.validate(n);
}

void Trajectory::interpolate(double t, double* out) const {
  const Eigen::Index n = x.cols();
  if (grid.steps == 0) {
    for (Eigen::Index k = 0; k < n; ++k) out[k] = x(0, k);
    return;
  }
  const double h = grid.h();
  double pos = (t - grid.t0) / h;
  auto k = static_cast<Eigen::Index>(std::floor(pos));
  k = std::clamp<Eigen::Index>(k, 0, static_cast<Eigen::Index>(grid.steps) - 1);
  const double s = pos - static_cast<double>(k);
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  for (Eigen::Index j = 0; j < n; ++j)
    out[j] = h00 * x(k, j) + h10 * h * dx(k, j) + h01 * x(k + 1, j) + h11 * h * dx(k + 1, j);
}

void rk4_block(const TimeGrid& grid, std::size_t d, const double* y0, const BlockRhs& f, Eigen::MatrixXd& y,
               Eigen::MatrixXd& dy) {
  const std::size_t points = grid.points();
  const auto dd = static_cast<Eigen::Index>(d);
  y.resize(static_cast<Eigen::Index>(points), dd);
  dy.resize(static_cast<Eigen::Index>(points), dd);
  const double h = grid.h();
  std::vector<double> cur(y0, y0 + d), k1(d), k2(d), k3(d), k4(d), tmp(d);
  for (std::size_t step = 0; step < grid.steps; ++step) {
    const double t = grid.at(step);
    for (std::size_t j = 0; j < d; ++j) y(static_cast<Eigen::Index>(step), static_cast<Eigen::Index>(j)) = cur[j];
    f(step, 0, t, cur.data(), k1.data());
    for (std::size_t j = 0; j < d; ++j) tmp[j] = cur[j] + 0.5 * h * k1[j];
    f(step, 1, t + 0.5 * h, tmp.data(), k2.data());
    for (std::size_t j = 0; j < d; ++j) tmp[j] = cur[j] + 0.5 * h * k2[j];
    f(step, 2, t + 0.5 * h, tmp.data(), k3.data());
    for (std::size_t j = 0; j < d; ++j) tmp[j] = cur[j] + h * k3[j];
    f(step, 3, grid.at(step + 1), tmp.data(), k4.data());
    for (std::size_t j = 0; j < d; ++j) {
      dy(static_cast<Eigen::Index>(step), static_cast<Eigen::Index>(j)) = k1[j];
      cur[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      if (!std::isfinite(cur[j])) {
        std::ostringstream os;
        os << "non-finite state at t=" << grid.at(step + 1) << " (component " << j << ")";
        throw Error(ErrorKind::integration_diverged, os.str());
      }
    }
  }
  const auto last = static_cast<Eigen::Index>(grid.steps);
  for (std::size_t j = 0; j < d; ++j) y(last, static_cast<Eigen::Index>(j)) = cur[j];
  f(grid.steps, 0, grid.at(grid.steps), cur.data(), k1.data());
  for (std::size_t j = 0; j < d; ++j) dy(last, static_cast<Eigen::Index>(j)) = k1[j];
}

Trajectory integrate(const NetworkSystem& sys, const double* xi, const TimeGrid& grid) {
  if (sys.kind != NetworkSystem::Kind::ode)
    throw Error(ErrorKind::invalid_argument, "integrate needs an ODE system");
  Trajectory traj;
  traj.grid = grid;
  std::vector<std::size_t> rows(sys.n);
  std::iota(rows.begin(), rows.end(), 0);
  rk4_block(
      grid, sys.n, sys.x0.data(),
      [&](std::size_t, int, double t, const double* y, double* dy) { sys.rhs_rows(rows, y, xi, t, dy); }, traj.x,
      traj.dx);
  return traj;
}

Trajectory integrate(const NetworkSystem& sys, const double* xi) { return integrate(sys, xi, sys.time_grid()); }

std::vector<double> solve_equilibrium(const NetworkSystem& sys, const double* xi, const std::vector<double>& guess) {
  std::vector<double> x = guess;
  std::vector<std::size_t> rows(sys.n);
  std::iota(rows.begin(), rows.end(), 0);
  solve_block(sys, rows, xi, x.data());
  return x;
}

void solve_block(const NetworkSystem& sys, std::span<const std::size_t> rows, const double* xi, double* x) {
  const std::size_t d = rows.size();
  const auto dd = static_cast<Eigen::Index>(d);
  Eigen::VectorXd r(dd);
  for (int iter = 0; iter <= 50; ++iter) {
    sys.rhs_rows(rows, x, xi, 0.0, r.data());
    if (!r.allFinite()) throw Error(ErrorKind::no_convergence, "Newton residual became non-finite");
    if (r.lpNorm<Eigen::Infinity>() < 1e-12) return;
    if (iter == 50) break;
    const Eigen::MatrixXd full = sys.jacobian_at(x, xi, 0.0);
    Eigen::MatrixXd jac(dd, dd);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        jac(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            full(static_cast<Eigen::Index>(rows[a]), static_cast<Eigen::Index>(rows[b]));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) throw Error(ErrorKind::singular_jacobian, "Newton Jacobian is singular");
    const Eigen::VectorXd step = lu.solve(r);
    for (std::size_t a = 0; a < d; ++a) x[rows[a]] -= step[static_cast<Eigen::Index>(a)];
  }
  throw Error(ErrorKind::no_convergence, "Newton did not converge in 50 iterations");
}

Trajectory solve_sample(const NetworkSystem& sys, const double* xi) {
  if (sys.kind == NetworkSystem::Kind::ode) return integrate(sys, xi);
  Trajectory traj;
  traj.grid = TimeGrid{0.0, 0.0, 0};
  const std::vector<double> x = solve_equilibrium(sys, xi, sys.x0);
  const auto n = static_cast<Eigen::Index>(sys.n);
  traj.x = Eigen::Map<const Eigen::RowVectorXd>(x.data(), n);
  traj.dx = Eigen::RowVectorXd::Zero(n);
  return traj;
}

Eigen::MatrixXd eval_observables(const NetworkSystem& sys, const Trajectory& traj, const double* xi) {
  Eigen::MatrixXd out(traj.x.rows(), static_cast<Eigen::Index>(sys.observables.size()));
  std::vector<double> row(sys.n);
  for (Eigen::Index k = 0; k < traj.x.rows(); ++k) {
    for (std::size_t j = 0; j < sys.n; ++j) row[j] = traj.x(k, static_cast<Eigen::Index>(j));
    const double t = traj.grid.at(static_cast<std::size_t>(k));
    for (std::size_t o = 0; o < sys.observables.size(); ++o)
      out(k, static_cast<Eigen::Index>(o)) = sys.observables[o].eval(row.data(), xi, t);
  }
  return out;
}

}  // namespace pwr
