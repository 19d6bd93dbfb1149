#include "pwr/pwr.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "pwr/error.hpp"
#include "pwr/sampling.hpp"

namespace pwr {

int PwrConfig::local_order_of(std::size_t i) const {
  if (i < local_order.size()) return local_order[i];
  return default_local_order >= 0 ? default_local_order : ls - 1;
}

int PwrConfig::indirect_order_of(std::size_t i) const {
  if (i < indirect_order.size()) return indirect_order[i];
  return default_indirect_order >= 0 ? default_indirect_order : lc - 1;
}

int PwrConfig::total_order_of(std::size_t i) const {
  if (total_order >= 0) return total_order;
  return std::max(local_order_of(i), indirect_order_of(i));
}

Eigen::MatrixXd SubsystemExpansion::mean() const {
  const std::size_t s = states.size(), pts = points();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts), static_cast<Eigen::Index>(s));
  for (std::size_t k = 0; k < pts; ++k)
    for (std::size_t j = 0; j < s; ++j)
      m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = coeffs(0, static_cast<Eigen::Index>(k * s + j));
  return m;
}

Eigen::MatrixXd SubsystemExpansion::variance() const {
  const std::size_t s = states.size(), pts = points();
  Eigen::MatrixXd v(static_cast<Eigen::Index>(pts), static_cast<Eigen::Index>(s));
  const Eigen::Index tail = coeffs.rows() - 1;
  for (std::size_t k = 0; k < pts; ++k)
    for (std::size_t j = 0; j < s; ++j)
      v(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          tail > 0 ? coeffs.col(static_cast<Eigen::Index>(k * s + j)).tail(tail).squaredNorm() : 0.0;
  return v;
}

BigInt expected_evaluations(const std::vector<std::size_t>& first, const std::vector<std::size_t>& later,
                            std::size_t iterations) {
  BigInt total = 1;
  for (std::size_t q : first) total += q;
  if (iterations > 1)
    for (std::size_t q : later) total += BigInt(q) * (iterations - 1);
  return total;
}

namespace {

std::size_t output_points(const NetworkSystem& sys) {
  return sys.kind == NetworkSystem::Kind::ode ? sys.time_grid().points() : 1;
}

TimeGrid output_grid(const NetworkSystem& sys) {
  return sys.kind == NetworkSystem::Kind::ode ? sys.time_grid() : TimeGrid{0.0, 0.0, 0};
}

// Psi_k of `src` at every node of `grid` (N x Q). Parameters of `src` absent
// from the grid are integrated out (project) or fixed at their means.
Eigen::MatrixXd cross_eval(const OrthoBasis& src, const CollocationGrid& grid, bool project, std::size_t q_count) {
  const std::size_t dims = src.dims();
  std::vector<std::ptrdiff_t> where(dims, -1);
  for (std::size_t d = 0; d < dims; ++d) {
    const auto& gs = grid.subset();
    const auto it = std::find(gs.begin(), gs.end(), src.subset()[d]);
    if (it != gs.end()) where[d] = it - gs.begin();
  }
  std::vector<bool> keep(src.size(), true);
  if (project)
    for (std::size_t k = 0; k < src.size(); ++k)
      for (std::size_t d = 0; d < dims; ++d)
        if (where[d] < 0 && src.members()[k][d] != 0) keep[k] = false;

  Eigen::MatrixXd out(static_cast<Eigen::Index>(src.size()), static_cast<Eigen::Index>(q_count));
  std::vector<double> node(grid.dims()), local(dims);
  Eigen::VectorXd psi(static_cast<Eigen::Index>(src.size()));
  for (std::size_t q = 0; q < q_count; ++q) {
    grid.node(q, node.data());
    for (std::size_t d = 0; d < dims; ++d)
      local[d] = where[d] >= 0 ? node[static_cast<std::size_t>(where[d])] : src.dists()[d].mean();
    if (src.size() > 0) src.eval_all(local.data(), psi.data());
    for (std::size_t k = 0; k < src.size(); ++k) if (!keep[k]) psi[static_cast<Eigen::Index>(k)] = 0.0;
    out.col(static_cast<Eigen::Index>(q)) = psi;
  }
  return out;
}

// sup |a - b| after embedding both in a common index space
double coeff_change(const SubsystemExpansion& next, const SubsystemExpansion& prev) {
  const auto map = projection_map(prev.basis, next.basis);
  std::vector<bool> used(prev.basis.size(), false);
  double err = 0.0;
  for (std::size_t k = 0; k < next.basis.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    if (map[k] >= 0) {
      used[static_cast<std::size_t>(map[k])] = true;
      err = std::max(err, (next.coeffs.row(row) - prev.coeffs.row(map[k])).cwiseAbs().maxCoeff());
    } else {
      err = std::max(err, next.coeffs.row(row).cwiseAbs().maxCoeff());
    }
  }
  for (std::size_t k = 0; k < prev.basis.size(); ++k)
    if (!used[k]) err = std::max(err, prev.coeffs.row(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff());
  return err;
}

SubsystemExpansion constant_expansion(const NetworkSystem& sys, const std::vector<std::size_t>& states,
                                      std::size_t points) {
  SubsystemExpansion e;
  e.states = states;
  e.basis = OrthoBasis::constant();
  const std::size_t s = states.size();
  e.coeffs.resize(1, static_cast<Eigen::Index>(points * s));
  for (std::size_t k = 0; k < points; ++k)
    for (std::size_t j = 0; j < s; ++j) e.coeffs(0, static_cast<Eigen::Index>(k * s + j)) = sys.x0[states[j]];
  if (sys.kind == NetworkSystem::Kind::ode) e.dcoeffs = Eigen::MatrixXd::Zero(1, e.coeffs.cols());
  return e;
}

std::string describe_node(const std::vector<std::size_t>& subset, const double* node) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t d = 0; d < subset.size(); ++d) os << (d ? ", " : "") << "xi" << subset[d] << "=" << node[d];
  os << ")";
  return os.str();
}

struct SubsystemGrid {
  CollocationGrid grid;
  OrthoBasis basis;
  std::size_t q = 0;
};

SubsystemGrid make_subsystem_grid(const NetworkSystem& sys, const Decomposition& d, const PwrConfig& cfg,
                                  std::size_t i, bool first) {
  const auto& local = d.local_params[i];
  const std::vector<std::size_t>& subset = first ? local : d.sigma[i];
  std::vector<int> levels, caps;
  for (std::size_t prm : subset) {
    const bool own = std::binary_search(local.begin(), local.end(), prm);
    levels.push_back(own ? cfg.ls : cfg.lc);
    caps.push_back(own ? cfg.local_order_of(i) : cfg.indirect_order_of(i));
  }
  SubsystemGrid g;
  g.grid = tensor_grid(sys.params, subset, levels);
  g.q = g.grid.size(cfg.q_max);
  g.basis = subset.empty() ? OrthoBasis::constant() : OrthoBasis(sys.params, subset, caps, cfg.total_order_of(i));
  return g;
}

}  // namespace

PwrResult pwr_nonintrusive(const NetworkSystem& sys, const Decomposition& d, const PwrConfig& cfg) {
  sys.validate();
  d.validate(sys.n);
  if (d.sigma.size() != d.m || d.neighbors.size() != d.m)
    throw Error(ErrorKind::invalid_argument, "decomposition has no parameter sets");
  const bool ode = sys.kind == NetworkSystem::Kind::ode;
  const TimeGrid tg = sys.time_grid();
  const std::size_t points = output_points(sys);
  const std::vector<double> means = sys.params.means();

  PwrResult res;
  res.grid = output_grid(sys);
  std::vector<SubsystemExpansion> cur(d.m);
  for (std::size_t i = 0; i < d.m; ++i) cur[i] = constant_expansion(sys, d.clusters[i], points);
  bool decoupled = true;
  for (const auto& nb : d.neighbors) decoupled = decoupled && nb.empty();

  std::vector<SubsystemGrid> later;
  res.report.evaluations = 1;
  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    const bool first = it == 1;
    if (it == 2 || first) {
      std::vector<SubsystemGrid> grids(d.m);
      for (std::size_t i = 0; i < d.m; ++i) grids[i] = make_subsystem_grid(sys, d, cfg, i, first);
      if (first) {
        for (const auto& g : grids) res.report.first_grid_sizes.push_back(g.q);
      } else {
        for (const auto& g : grids) res.report.grid_sizes.push_back(g.q);
      }
      later = std::move(grids);
    }
    const auto& grids = later;
    const bool project = it >= cfg.project_from_iteration;

    // neighbor evaluation matrices at this subsystem's nodes
    std::vector<std::vector<Eigen::MatrixXd>> cross(d.m);
    for_each_index(cfg.policy, d.m, [&](std::size_t i) {
      for (std::size_t j : d.neighbors[i]) cross[i].push_back(cross_eval(cur[j].basis, grids[i].grid, project, grids[i].q));
    });

    std::vector<std::size_t> offset(d.m + 1, 0);
    for (std::size_t i = 0; i < d.m; ++i) offset[i + 1] = offset[i] + grids[i].q;
    std::vector<Eigen::MatrixXd> sx(d.m), sdx(d.m);
    for (std::size_t i = 0; i < d.m; ++i) {
      const auto cols = static_cast<Eigen::Index>(points * d.clusters[i].size());
      sx[i].resize(static_cast<Eigen::Index>(grids[i].q), cols);
      if (ode) sdx[i].resize(static_cast<Eigen::Index>(grids[i].q), cols);
    }

    for_each_index(cfg.policy, offset[d.m], [&](std::size_t item) {
      const std::size_t i = static_cast<std::size_t>(std::upper_bound(offset.begin(), offset.end(), item) - offset.begin()) - 1;
      const std::size_t q = item - offset[i];
      const auto& own = d.clusters[i];
      const auto& nbs = d.neighbors[i];
      const CollocationGrid& grid = grids[i].grid;
      std::vector<double> node(grid.dims()), xi(means);
      grid.node(q, node.data());
      for (std::size_t k = 0; k < node.size(); ++k) xi[grid.subset()[k]] = node[k];

      // neighbor waveforms at this node
      std::vector<std::size_t> nb_vars;
      for (std::size_t j : nbs) nb_vars.insert(nb_vars.end(), d.clusters[j].begin(), d.clusters[j].end());
      Waveform nb;
      nb.grid = tg;
      nb.x.resize(static_cast<Eigen::Index>(points), static_cast<Eigen::Index>(nb_vars.size()));
      if (ode) nb.dx.resize(nb.x.rows(), nb.x.cols());
      std::size_t col = 0;
      for (std::size_t a = 0; a < nbs.size(); ++a) {
        const SubsystemExpansion& e = cur[nbs[a]];
        const std::size_t s = e.states.size();
        const Eigen::VectorXd v = e.coeffs.transpose() * cross[i][a].col(static_cast<Eigen::Index>(q));
        Eigen::VectorXd dv;
        if (ode) dv = e.dcoeffs.transpose() * cross[i][a].col(static_cast<Eigen::Index>(q));
        for (std::size_t k = 0; k < points; ++k)
          for (std::size_t j = 0; j < s; ++j) {
            nb.x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(col + j)) = v[static_cast<Eigen::Index>(k * s + j)];
            if (ode) nb.dx(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(col + j)) = dv[static_cast<Eigen::Index>(k * s + j)];
          }
        col += s;
      }

      std::vector<double> full(sys.x0);
      const std::size_t s = own.size();
      try {
        if (ode) {
          std::vector<double> y0(s);
          for (std::size_t j = 0; j < s; ++j) y0[j] = sys.x0[own[j]];
          Eigen::MatrixXd y, dy;
          rk4_block(
              tg, s, y0.data(),
              [&](std::size_t step, int stage, double t, const double* yv, double* dyv) {
                for (std::size_t v = 0; v < nb_vars.size(); ++v) full[nb_vars[v]] = nb.at_stage(step, stage, v);
                for (std::size_t j = 0; j < s; ++j) full[own[j]] = yv[j];
                sys.rhs_rows(own, full.data(), xi.data(), t, dyv);
              },
              y, dy);
          for (std::size_t k = 0; k < points; ++k)
            for (std::size_t j = 0; j < s; ++j) {
              sx[i](static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(k * s + j)) = y(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
              sdx[i](static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(k * s + j)) = dy(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
            }
        } else {
          for (std::size_t v = 0; v < nb_vars.size(); ++v) full[nb_vars[v]] = nb.x(0, static_cast<Eigen::Index>(v));
          solve_block(sys, own, xi.data(), full.data());
          for (std::size_t j = 0; j < s; ++j) sx[i](static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(j)) = full[own[j]];
        }
      } catch (const Error& e) {
        throw Error(e.kind(), std::string(e.what()) + " (subsystem " + std::to_string(i) + ", node " +
                                  describe_node(grid.subset(), node.data()) + ")");
      }
    });
    res.report.evaluations += offset[d.m];

    std::vector<SubsystemExpansion> next(d.m);
    for_each_index(cfg.policy, d.m, [&](std::size_t i) {
      next[i].states = d.clusters[i];
      next[i].basis = grids[i].basis;
      next[i].coeffs = pseudo_spectral_coeffs(sx[i], grids[i].grid, grids[i].basis).coeffs;
      if (ode) next[i].dcoeffs = pseudo_spectral_coeffs(sdx[i], grids[i].grid, grids[i].basis).coeffs;
    });
    double change = 0.0;
    for (std::size_t i = 0; i < d.m; ++i) change = std::max(change, coeff_change(next[i], cur[i]));
    cur = std::move(next);
    res.report.changes.push_back(change);
    res.report.iterations = it;
    if (cfg.track_history) res.report.history.push_back(surrogate_stats(sys, cur, res.grid, cfg));
    if ((first && decoupled) || (!first && change < cfg.eps)) {
      res.report.converged = true;
      break;
    }
  }
  res.report.predicted_evaluations =
      expected_evaluations(res.report.first_grid_sizes, res.report.grid_sizes, res.report.iterations);
  res.subsystems = std::move(cur);
  res.stats = cfg.track_history && !res.report.history.empty() ? res.report.history.back()
                                                               : surrogate_stats(sys, res.subsystems, res.grid, cfg);
  return res;
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct AgpBlock {
  std::vector<std::size_t> states;
  OrthoBasis basis;
  std::size_t offset = 0;  // first variable of this block
  CollocationGrid grid;
  std::size_t q = 0;
  Eigen::MatrixXd psi;       // N x Q
  Eigen::MatrixXd weighted;  // N x Q, Psi * w
  Eigen::MatrixXd xi;        // p x Q full parameter vectors
  std::vector<Eigen::MatrixXd> cross;  // per neighbor, N_j x Q
  std::size_t vars() const { return basis.size() * states.size(); }
};

}  // namespace

PwrResult pwr_intrusive(const NetworkSystem& sys, const Decomposition& d, const PwrConfig& cfg,
                        const IntrusiveOptions& opt) {
  sys.validate();
  d.validate(sys.n);
  if (sys.kind != NetworkSystem::Kind::ode)
    throw Error(ErrorKind::invalid_argument, "intrusive relaxation needs an ODE system");
  if (d.sigma.size() != d.m || d.neighbors.size() != d.m)
    throw Error(ErrorKind::invalid_argument, "decomposition has no parameter sets");
  const TimeGrid tg = sys.time_grid();
  const std::vector<double> means = sys.params.means();

  std::vector<AgpBlock> blocks(d.m);
  std::size_t dim = 0;
  for (std::size_t i = 0; i < d.m; ++i) {
    AgpBlock& b = blocks[i];
    b.states = d.clusters[i];
    const auto& local = d.local_params[i];
    std::vector<int> caps, levels;
    for (std::size_t prm : d.sigma[i]) {
      const bool own = std::binary_search(local.begin(), local.end(), prm);
      caps.push_back(own ? cfg.local_order_of(i) : cfg.indirect_order_of(i));
      levels.push_back(caps.back() + 1);
    }
    b.basis = d.sigma[i].empty() ? OrthoBasis::constant() : OrthoBasis(sys.params, d.sigma[i], caps, cfg.total_order_of(i));
    b.grid = tensor_grid(sys.params, d.sigma[i], levels);
    const CollocationGrid& grid = b.grid;
    b.q = grid.size(cfg.q_max);
    b.weighted = weighted_basis_matrix(b.basis, grid, cfg.policy);
    b.psi = cross_eval(b.basis, grid, true, b.q);
    b.xi.resize(static_cast<Eigen::Index>(means.size()), static_cast<Eigen::Index>(b.q));
    std::vector<double> node(grid.dims());
    for (std::size_t q = 0; q < b.q; ++q) {
      grid.node(q, node.data());
      std::vector<double> full(means);
      for (std::size_t k = 0; k < node.size(); ++k) full[grid.subset()[k]] = node[k];
      for (std::size_t k = 0; k < full.size(); ++k) b.xi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(q)) = full[k];
    }
    b.offset = dim;
    dim += b.vars();
  }
  for (std::size_t i = 0; i < d.m; ++i)
    for (std::size_t j : d.neighbors[i])
      blocks[i].cross.push_back(cross_eval(blocks[j].basis, blocks[i].grid, true, blocks[i].q));

  std::atomic<std::size_t> node_evals{0};
  BlockOde ode;
  ode.dim = dim;
  ode.blocks.resize(d.m);
  ode.deps.resize(d.m);
  ode.x0.assign(dim, 0.0);
  for (std::size_t i = 0; i < d.m; ++i) {
    const AgpBlock& b = blocks[i];
    for (std::size_t v = 0; v < b.vars(); ++v) ode.blocks[i].push_back(b.offset + v);
    for (std::size_t j : d.neighbors[i])
      for (std::size_t v = 0; v < blocks[j].vars(); ++v) ode.deps[i].push_back(blocks[j].offset + v);
    for (std::size_t s = 0; s < b.states.size(); ++s) ode.x0[b.offset + s] = sys.x0[b.states[s]];
  }
  ode.f = [&](std::size_t i, const double* x, double t, double* dx) {
    const AgpBlock& b = blocks[i];
    const auto s = static_cast<Eigen::Index>(b.states.size());
    const auto n = static_cast<Eigen::Index>(b.basis.size());
    const Eigen::Map<const RowMajor> c(x + b.offset, n, s);
    const Eigen::MatrixXd own = b.psi.transpose() * c;  // Q x S
    std::vector<Eigen::MatrixXd> nbv;
    for (std::size_t a = 0; a < d.neighbors[i].size(); ++a) {
      const AgpBlock& bj = blocks[d.neighbors[i][a]];
      const Eigen::Map<const RowMajor> cj(x + bj.offset, static_cast<Eigen::Index>(bj.basis.size()),
                                          static_cast<Eigen::Index>(bj.states.size()));
      nbv.push_back(b.cross[a].transpose() * cj);
    }
    Eigen::MatrixXd f(static_cast<Eigen::Index>(b.q), s);
    std::vector<double> full(sys.x0), out(b.states.size());
    for (std::size_t q = 0; q < b.q; ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      for (Eigen::Index k = 0; k < s; ++k) full[b.states[static_cast<std::size_t>(k)]] = own(qi, k);
      for (std::size_t a = 0; a < nbv.size(); ++a) {
        const auto& st = blocks[d.neighbors[i][a]].states;
        for (std::size_t k = 0; k < st.size(); ++k) full[st[k]] = nbv[a](qi, static_cast<Eigen::Index>(k));
      }
      sys.rhs_rows(b.states, full.data(), b.xi.col(qi).data(), t, out.data());
      for (Eigen::Index k = 0; k < s; ++k) f(qi, k) = out[static_cast<std::size_t>(k)];
    }
    node_evals += b.q;
    Eigen::Map<RowMajor>(dx, n, s) = b.weighted * f;
  };
  ode.jacobian = [&](const double* x, double t) {
    std::vector<double> xp(x, x + dim), fp(dim), fm(dim);
    auto full_rhs = [&](const std::vector<double>& y, std::vector<double>& out) {
      for (std::size_t i = 0; i < d.m; ++i) ode.f(i, y.data(), t, out.data() + blocks[i].offset);
    };
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t v = 0; v < dim; ++v) {
      const double h = 1e-6 * (1.0 + std::abs(x[v]));
      xp[v] = x[v] + h;
      full_rhs(xp, fp);
      xp[v] = x[v] - h;
      full_rhs(xp, fm);
      xp[v] = x[v];
      for (std::size_t r = 0; r < dim; ++r) jac(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(v)) = (fp[r] - fm[r]) / (2 * h);
    }
    return jac;
  };

  PwrResult res;
  res.grid = tg;
  WrReport wr;
  Waveform w;
  if (opt.adaptive) {
    AwrOptions a = opt.awr;
    a.wr.policy = cfg.policy;
    w = awr_solve_blocks(ode, tg, a, wr);
  } else {
    WrOptions o = opt.awr.wr;
    o.policy = cfg.policy;
    w = wr_solve_blocks(ode, tg, Waveform::constant(tg, ode.x0), o, wr);
  }
  const std::size_t points = tg.points();
  for (std::size_t i = 0; i < d.m; ++i) {
    const AgpBlock& b = blocks[i];
    SubsystemExpansion e;
    e.states = b.states;
    e.basis = b.basis;
    const std::size_t s = b.states.size(), n = b.basis.size();
    e.coeffs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(points * s));
    e.dcoeffs.resize(e.coeffs.rows(), e.coeffs.cols());
    for (std::size_t k = 0; k < points; ++k)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t a = 0; a < s; ++a) {
          const auto v = static_cast<Eigen::Index>(b.offset + j * s + a);
          e.coeffs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k * s + a)) = w.x(static_cast<Eigen::Index>(k), v);
          e.dcoeffs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k * s + a)) = w.dx(static_cast<Eigen::Index>(k), v);
        }
    res.subsystems.push_back(std::move(e));
  }
  res.report.iterations = wr.iterations;
  res.report.converged = wr.converged;
  res.report.changes = wr.errors;
  res.report.evaluations = node_evals.load();
  res.report.relaxation = wr;
  res.stats = surrogate_stats(sys, res.subsystems, res.grid, cfg);
  return res;
}

void eval_surrogate(const std::vector<SubsystemExpansion>& subs, const double* xi_global, std::size_t k, double* x) {
  std::vector<double> local;
  for (const auto& e : subs) {
    const std::size_t s = e.states.size();
    local.resize(e.basis.dims());
    for (std::size_t d = 0; d < local.size(); ++d) local[d] = xi_global[e.basis.subset()[d]];
    Eigen::VectorXd psi(static_cast<Eigen::Index>(e.basis.size()));
    e.basis.eval_all(local.data(), psi.data());
    for (std::size_t j = 0; j < s; ++j) x[e.states[j]] = e.coeffs.col(static_cast<Eigen::Index>(k * s + j)).dot(psi);
  }
}

namespace {

// points x observables for one parameter point
Eigen::MatrixXd surrogate_observables(const NetworkSystem& sys, const std::vector<SubsystemExpansion>& subs,
                                      const TimeGrid& grid, const double* xi) {
  const std::size_t points = grid.points(), no = sys.observables.size();
  Eigen::MatrixXd states(static_cast<Eigen::Index>(sys.n), static_cast<Eigen::Index>(points));
  std::vector<double> local;
  for (const auto& e : subs) {
    const std::size_t s = e.states.size();
    local.resize(e.basis.dims());
    for (std::size_t d = 0; d < local.size(); ++d) local[d] = xi[e.basis.subset()[d]];
    Eigen::VectorXd psi(static_cast<Eigen::Index>(e.basis.size()));
    e.basis.eval_all(local.data(), psi.data());
    const Eigen::VectorXd v = e.coeffs.transpose() * psi;
    for (std::size_t k = 0; k < points; ++k)
      for (std::size_t j = 0; j < s; ++j)
        states(static_cast<Eigen::Index>(e.states[j]), static_cast<Eigen::Index>(k)) = v[static_cast<Eigen::Index>(k * s + j)];
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(points), static_cast<Eigen::Index>(no));
  for (std::size_t k = 0; k < points; ++k)
    for (std::size_t o = 0; o < no; ++o)
      out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(o)) =
          sys.observables[o].eval(states.col(static_cast<Eigen::Index>(k)).data(), xi, grid.at(k));
  return out;
}

}  // namespace

ObservableStats surrogate_stats(const NetworkSystem& sys, const std::vector<SubsystemExpansion>& subs,
                                const TimeGrid& grid, const PwrConfig& cfg) {
  const std::size_t p = sys.params.size(), points = grid.points(), no = sys.observables.size();
  ObservableStats st;
  st.grid = grid;
  for (const auto& o : sys.observables) st.names.push_back(o.name);
  const std::vector<double> means = sys.params.means();
  const auto last = static_cast<Eigen::Index>(points - 1);

  const double q_count = std::pow(static_cast<double>(cfg.ls), static_cast<double>(p));
  std::vector<std::vector<double>> final_values(no);
  if (p == 0 || q_count <= cfg.observable_grid_budget) {
    std::vector<std::size_t> all(p);
    std::iota(all.begin(), all.end(), 0);
    const CollocationGrid g = tensor_grid(sys.params, all, std::vector<int>(p, cfg.ls));
    const std::size_t q = g.size(cfg.q_max);
    const int order = cfg.observable_order >= 0 ? cfg.observable_order : cfg.ls - 1;
    const OrthoBasis basis = p == 0 ? OrthoBasis::constant() : OrthoBasis(sys.params, all, std::vector<int>(p, order), order);
    Eigen::MatrixXd samples(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(points * no));
    for_each_index(cfg.policy, q, [&](std::size_t n) {
      std::vector<double> xi(p);
      g.node(n, xi.data());
      const Eigen::MatrixXd o = surrogate_observables(sys, subs, grid, xi.data());
      for (std::size_t k = 0; k < points; ++k)
        for (std::size_t j = 0; j < no; ++j)
          samples(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k * no + j)) =
              o(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
    });
    const Moments mo = moments(pseudo_spectral_coeffs(samples, g, basis, cfg.policy));
    st.mean.resize(static_cast<Eigen::Index>(points), static_cast<Eigen::Index>(no));
    st.var.resize(st.mean.rows(), st.mean.cols());
    for (std::size_t k = 0; k < points; ++k)
      for (std::size_t j = 0; j < no; ++j) {
        st.mean(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = mo.mean[static_cast<Eigen::Index>(k * no + j)];
        st.var(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = mo.var[static_cast<Eigen::Index>(k * no + j)];
      }
    // histogram of the final time from quasi-random draws of the surrogate
    if (p > 0 && p <= kSobolMaxDims) {
      Sobol sobol(p);
      std::vector<double> u(p);
      std::vector<double> pts(cfg.observable_samples * p);
      for (std::size_t n = 0; n < cfg.observable_samples; ++n) {
        sobol.next(u.data());
        for (std::size_t k = 0; k < p; ++k) pts[n * p + k] = from_uniform(sys.params.params[k], u[k]);
      }
      const TimeGrid tail{grid.at(points - 1), 0.0, 0};
      std::vector<SubsystemExpansion> end(subs.size());
      for (std::size_t i = 0; i < subs.size(); ++i) {
        end[i].states = subs[i].states;
        end[i].basis = subs[i].basis;
        const auto s = static_cast<Eigen::Index>(subs[i].states.size());
        end[i].coeffs = subs[i].coeffs.rightCols(s);
      }
      Eigen::MatrixXd vals(static_cast<Eigen::Index>(cfg.observable_samples), static_cast<Eigen::Index>(no));
      for_each_index(cfg.policy, cfg.observable_samples, [&](std::size_t n) {
        vals.row(static_cast<Eigen::Index>(n)) = surrogate_observables(sys, end, tail, &pts[n * p]).row(0);
      });
      for (std::size_t j = 0; j < no; ++j)
        final_values[j].assign(vals.col(static_cast<Eigen::Index>(j)).data(),
                               vals.col(static_cast<Eigen::Index>(j)).data() + vals.rows());
    }
  } else {
    MomentAccumulator acc(static_cast<Eigen::Index>(points), static_cast<Eigen::Index>(no));
    const bool quasi = p <= kSobolMaxDims;
    Sobol sobol(quasi ? p : 1);
    std::mt19937_64 rng(derive_seed(cfg.seed, kStreamSurrogate));
    std::vector<double> u(p), pts;
    const std::size_t chunk = 256;
    std::vector<Eigen::MatrixXd> out;
    for (std::size_t begin = 0; begin < cfg.observable_samples; begin += chunk) {
      const std::size_t len = std::min(chunk, cfg.observable_samples - begin);
      pts.assign(len * p, 0.0);
      for (std::size_t n = 0; n < len; ++n) {
        if (quasi) {
          sobol.next(u.data());
        } else {
          for (auto& v : u) {
            v = uniform01(rng);
            while (v <= 0.0) v = uniform01(rng);
          }
        }
        for (std::size_t k = 0; k < p; ++k) pts[n * p + k] = from_uniform(sys.params.params[k], u[k]);
      }
      out.assign(len, Eigen::MatrixXd());
      for_each_index(cfg.policy, len, [&](std::size_t n) { out[n] = surrogate_observables(sys, subs, grid, &pts[n * p]); });
      for (std::size_t n = 0; n < len; ++n) {
        acc.add(out[n]);
        for (std::size_t j = 0; j < no; ++j) final_values[j].push_back(out[n](last, static_cast<Eigen::Index>(j)));
      }
    }
    st.mean = acc.mean();
    st.var = acc.variance();
  }
  for (std::size_t j = 0; j < no; ++j)
    st.histograms.push_back(make_histogram(st.names[j], final_values[j], st.mean(last, static_cast<Eigen::Index>(j)),
                                           st.var(last, static_cast<Eigen::Index>(j)), cfg.bins));
  return st;
}

}  // namespace pwr
