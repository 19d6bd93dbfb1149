#include "pwr/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pwr/error.hpp"
#include "pwr/linalg.hpp"

namespace pwr {

Waveform wr_sweep(const BlockOde& sys, const TimeGrid& grid, const Waveform& prev, const std::vector<double>& x0,
                  ExecPolicy policy) {
  Waveform out;
  out.grid = grid;
  out.x.resize(static_cast<Eigen::Index>(grid.points()), static_cast<Eigen::Index>(sys.dim));
  out.dx.resize(out.x.rows(), out.x.cols());
  for_each_index(policy, sys.blocks.size(), [&](std::size_t b) {
    const auto& own = sys.blocks[b];
    const auto& deps = sys.deps[b];
    std::vector<double> full(x0), y0(own.size());
    for (std::size_t k = 0; k < own.size(); ++k) y0[k] = x0[own[k]];
    Eigen::MatrixXd y, dy;
    rk4_block(
        grid, own.size(), y0.data(),
        [&](std::size_t step, int stage, double t, const double* yv, double* dyv) {
          for (std::size_t v : deps) full[v] = prev.at_stage(step, stage, v);
          for (std::size_t k = 0; k < own.size(); ++k) full[own[k]] = yv[k];
          sys.f(b, full.data(), t, dyv);
        },
        y, dy);
    for (std::size_t k = 0; k < own.size(); ++k) {
      out.x.col(static_cast<Eigen::Index>(own[k])) = y.col(static_cast<Eigen::Index>(k));
      out.dx.col(static_cast<Eigen::Index>(own[k])) = dy.col(static_cast<Eigen::Index>(k));
    }
  });
  return out;
}

Waveform wr_solve_blocks(const BlockOde& sys, const TimeGrid& grid, const Waveform& initial, const WrOptions& opt,
                         WrReport& report) {
  Waveform cur = initial;
  if (opt.keep_iterates) report.iterates.push_back(cur);
  report.converged = false;
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    Waveform next = wr_sweep(sys, grid, cur, sys.x0, opt.policy);
    const double err = sup_distance(next, cur);
    report.errors.push_back(err);
    report.iterations = it;
    cur = std::move(next);
    if (opt.keep_iterates) report.iterates.push_back(cur);
    if (err < opt.eps) {
      report.converged = true;
      break;
    }
  }
  return cur;
}

double awr_next_window(double prev, double e0_coeff, const std::vector<double>& nodes, double t_start, double mu,
                       double eta, int r, double eps) {
  double cand = 2.0 * prev;
  const double delta = prev / 20.0;
  double rfact = 1.0;
  for (int k = 2; k <= r; ++k) rfact *= k;
  while (true) {
    double omega = 1.0;
    for (double tj : nodes) omega *= (t_start + cand - tj);
    const double e0 = e0_coeff * std::abs(omega);
    const double est = std::pow(std::exp(mu * cand) * eta * cand, r) / rfact * e0;
    if (est > eps && cand > 0.5 * prev + 1e-12 * prev)
      cand -= delta;
    else
      break;
  }
  return cand;
}

namespace {

// Lagrange extrapolant through (t_j, y_j) for every variable.
struct Extrapolant {
  std::vector<double> nodes;
  Eigen::MatrixXd values;  // nodes x vars

  void eval(double t, double* y, double* dy) const {
    const std::size_t m = nodes.size();
    const auto vars = values.cols();
    for (Eigen::Index v = 0; v < vars; ++v) {
      y[v] = 0.0;
      dy[v] = 0.0;
    }
    for (std::size_t j = 0; j < m; ++j) {
      double lj = 1.0, dlj = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        if (k == j) continue;
        const double denom = nodes[j] - nodes[k];
        dlj = dlj * (t - nodes[k]) / denom + lj / denom;
        lj *= (t - nodes[k]) / denom;
      }
      for (Eigen::Index v = 0; v < vars; ++v) {
        y[v] += lj * values(static_cast<Eigen::Index>(j), v);
        dy[v] += dlj * values(static_cast<Eigen::Index>(j), v);
      }
    }
  }

  // max over variables of |p^{(l)}| / (l+1)!
  double error_coeff() const {
    const std::size_t m = nodes.size();
    const int l = static_cast<int>(m) - 1;
    double lfact = 1.0;
    for (int k = 2; k <= l; ++k) lfact *= k;
    double best = 0.0;
    for (Eigen::Index v = 0; v < values.cols(); ++v) {
      double lead = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        double denom = 1.0;
        for (std::size_t k = 0; k < m; ++k)
          if (k != j) denom *= nodes[j] - nodes[k];
        lead += values(static_cast<Eigen::Index>(j), v) / denom;
      }
      best = std::max(best, std::abs(lfact * lead) / (lfact * (l + 1)));
    }
    return best;
  }
};

void coupling_norms(const BlockOde& sys, const Waveform& w, double& mu, double& eta) {
  std::vector<std::size_t> block_of(sys.dim, 0);
  for (std::size_t b = 0; b < sys.blocks.size(); ++b)
    for (std::size_t v : sys.blocks[b]) block_of[v] = b;
  mu = 0.0;
  eta = 0.0;
  if (!sys.jacobian) return;
  std::vector<double> row(sys.dim);
  for (Eigen::Index k = 0; k < w.x.rows(); ++k) {
    for (std::size_t v = 0; v < sys.dim; ++v) row[v] = w.x(k, static_cast<Eigen::Index>(v));
    const Eigen::MatrixXd jac = sys.jacobian(row.data(), w.grid.at(static_cast<std::size_t>(k)));
    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(jac.rows(), jac.cols());
    Eigen::MatrixXd off = jac;
    for (Eigen::Index i = 0; i < jac.rows(); ++i)
      for (Eigen::Index j = 0; j < jac.cols(); ++j)
        if (block_of[static_cast<std::size_t>(i)] == block_of[static_cast<std::size_t>(j)]) {
          diag(i, j) = jac(i, j);
          off(i, j) = 0.0;
        }
    mu = std::max(mu, inf_norm(diag));
    eta = std::max(eta, inf_norm(off));
  }
}

}  // namespace

Waveform awr_solve_blocks(const BlockOde& sys, const TimeGrid& grid, const AwrOptions& opt, WrReport& report) {
  if (opt.order < 1) throw Error(ErrorKind::invalid_argument, "extrapolation order must be >= 1");
  const double h = grid.h();
  const std::size_t total = grid.steps;
  auto to_steps = [&](double len) { return static_cast<std::size_t>(std::max(1.0, std::round(len / h))); };
  const std::size_t min_steps = std::min(total, to_steps(opt.min_window > 0 ? opt.min_window : grid.horizon / 50.0));
  std::size_t len = std::max(min_steps, to_steps(opt.initial_window > 0 ? opt.initial_window : grid.horizon / 20.0));

  Waveform out;
  out.grid = grid;
  out.x.resize(static_cast<Eigen::Index>(grid.points()), static_cast<Eigen::Index>(sys.dim));
  out.dx.resize(out.x.rows(), out.x.cols());

  report = WrReport{};
  report.converged = true;
  std::size_t start = 0;
  std::vector<double> state = sys.x0;
  const Extrapolant* extrap = nullptr;
  Extrapolant ex;
  while (start < total) {
    len = std::min(len, total - start);
    if (total - start - len < min_steps) len = total - start;
    TimeGrid sub{grid.at(start), h * static_cast<double>(len), len};

    Waveform guess = Waveform::constant(sub, state);
    if (extrap) {
      std::vector<double> y(sys.dim), dy(sys.dim);
      for (std::size_t k = 0; k < sub.points(); ++k) {
        extrap->eval(sub.at(k), y.data(), dy.data());
        for (std::size_t v = 0; v < sys.dim; ++v) {
          guess.x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(v)) = y[v];
          guess.dx(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(v)) = dy[v];
        }
      }
      // the extrapolant passes through the window start
      for (std::size_t v = 0; v < sys.dim; ++v) guess.x(0, static_cast<Eigen::Index>(v)) = state[v];
    }
    BlockOde local = sys;
    local.x0 = state;
    WrReport wr;
    const Waveform w = wr_solve_blocks(local, sub, guess, opt.wr, wr);
    report.errors.insert(report.errors.end(), wr.errors.begin(), wr.errors.end());
    report.iterations += wr.iterations;
    report.converged = report.converged && wr.converged;
    report.windows.push_back({sub.t0, grid.at(start + len)});
    report.window_iterations.push_back(wr.iterations);
    const auto rows = static_cast<Eigen::Index>(len + 1);
    out.x.middleRows(static_cast<Eigen::Index>(start), rows) = w.x;
    out.dx.middleRows(static_cast<Eigen::Index>(start), rows) = w.dx;
    for (std::size_t v = 0; v < sys.dim; ++v) state[v] = w.x(rows - 1, static_cast<Eigen::Index>(v));

    // extrapolant through l+1 points spanning the finished window
    const double t_end = grid.at(start + len);
    const double span = h * static_cast<double>(len);
    ex.nodes.clear();
    ex.values.resize(opt.order + 1, static_cast<Eigen::Index>(sys.dim));
    std::vector<double> sample(sys.dim);
    for (int j = 0; j <= opt.order; ++j) {
      const double tj = t_end - span * static_cast<double>(j) / static_cast<double>(opt.order);
      ex.nodes.push_back(tj);
      w.interpolate(tj, sample.data());
      for (std::size_t v = 0; v < sys.dim; ++v) ex.values(j, static_cast<Eigen::Index>(v)) = sample[v];
    }
    extrap = &ex;
    double mu = 0.0, eta = 0.0;
    coupling_norms(sys, w, mu, eta);
    const double next = awr_next_window(span, ex.error_coeff(), ex.nodes, t_end, mu, eta, opt.r, opt.wr.eps);
    start += len;
    len = std::max(min_steps, to_steps(next));
  }
  return out;
}

BlockOde block_ode_from_system(const NetworkSystem& sys, const Decomposition& d, const std::vector<double>& xi) {
  BlockOde b;
  b.dim = sys.n;
  b.blocks = d.clusters;
  b.x0 = sys.x0;
  b.deps.resize(d.m);
  for (std::size_t i = 0; i < d.m; ++i)
    for (std::size_t s = 0; s < sys.n; ++s)
      if (d.assign[s] != i) b.deps[i].push_back(s);
  auto clusters = d.clusters;
  b.f = [&sys, clusters, xi](std::size_t blk, const double* x, double t, double* dx) {
    sys.rhs_rows(clusters[blk], x, xi.data(), t, dx);
  };
  b.jacobian = [&sys, xi](const double* x, double t) { return sys.jacobian_at(x, xi.data(), t); };
  return b;
}

Trajectory wr_solve(const NetworkSystem& sys, const Decomposition& d, const std::vector<double>& xi,
                    const WrOptions& opt, WrReport& report, const Waveform* initial) {
  const BlockOde b = block_ode_from_system(sys, d, xi);
  const TimeGrid grid = sys.time_grid();
  const Waveform start = initial ? *initial : Waveform::constant(grid, sys.x0);
  return wr_solve_blocks(b, grid, start, opt, report).as_trajectory();
}

Trajectory awr_windows(const NetworkSystem& sys, const Decomposition& d, const std::vector<double>& xi,
                       const AwrOptions& opt, WrReport& report) {
  const BlockOde b = block_ode_from_system(sys, d, xi);
  return awr_solve_blocks(b, sys.time_grid(), opt, report).as_trajectory();
}

std::vector<double> relax_algebraic(const NetworkSystem& sys, const Decomposition& d, const std::vector<double>& xi,
                                    const WrOptions& opt, WrReport& report) {
  std::vector<double> cur = sys.x0;
  report.converged = false;
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    std::vector<double> next = cur;
    for_each_index(opt.policy, d.m, [&](std::size_t i) {
      std::vector<double> local = cur;
      solve_block(sys, d.clusters[i], xi.data(), local.data());
      for (std::size_t s : d.clusters[i]) next[s] = local[s];
    });
    double err = 0.0;
    for (std::size_t s = 0; s < sys.n; ++s) err = std::max(err, std::abs(next[s] - cur[s]));
    cur = std::move(next);
    report.errors.push_back(err);
    report.iterations = it;
    if (err < opt.eps) {
      report.converged = true;
      break;
    }
  }
  return cur;
}

}  // namespace pwr
