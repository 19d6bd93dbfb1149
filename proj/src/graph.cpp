#include "pwr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <set>

#include "pwr/error.hpp"
#include "pwr/linalg.hpp"
#include "pwr/sampling.hpp"

namespace pwr {

void Decomposition::validate(std::size_t n) const {
  if (assign.size() != n) throw Error(ErrorKind::invalid_argument, "decomposition must assign every state");
  std::vector<int> seen(n, 0);
  for (std::size_t i = 0; i < clusters.size(); ++i)
    for (std::size_t s : clusters[i]) {
      if (s >= n || assign[s] != i) throw Error(ErrorKind::invalid_argument, "cluster lists disagree with assignment");
      ++seen[s];
    }
  for (std::size_t s = 0; s < n; ++s)
    if (seen[s] != 1) throw Error(ErrorKind::invalid_argument, "clusters must partition the states");
  for (std::size_t i = 0; i < neighbors.size(); ++i)
    for (std::size_t j : neighbors[i])
      if (j == i || j >= m) throw Error(ErrorKind::invalid_argument, "invalid neighbor set");
}

Decomposition decomposition_from_assign(const std::vector<std::size_t>& raw) {
  Decomposition d;
  std::vector<std::size_t> label(raw.empty() ? 0 : *std::max_element(raw.begin(), raw.end()) + 1,
                                 std::numeric_limits<std::size_t>::max());
  d.assign.resize(raw.size());
  for (std::size_t s = 0; s < raw.size(); ++s) {
    if (label[raw[s]] == std::numeric_limits<std::size_t>::max()) {
      label[raw[s]] = d.clusters.size();
      d.clusters.emplace_back();
    }
    d.assign[s] = label[raw[s]];
    d.clusters[d.assign[s]].push_back(s);
  }
  d.m = d.clusters.size();
  return d;
}

Decomposition decomposition_from_clusters(const std::vector<std::vector<std::size_t>>& clusters, std::size_t n) {
  std::vector<std::size_t> assign(n, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < clusters.size(); ++i)
    for (std::size_t s : clusters[i]) {
      if (s >= n) throw Error(ErrorKind::index_out_of_range, "cluster lists an unknown state");
      if (assign[s] != std::numeric_limits<std::size_t>::max())
        throw Error(ErrorKind::invalid_argument, "state " + std::to_string(s) + " appears in two clusters");
      assign[s] = i;
    }
  for (std::size_t s = 0; s < n; ++s)
    if (assign[s] == std::numeric_limits<std::size_t>::max())
      throw Error(ErrorKind::invalid_argument, "state " + std::to_string(s) + " is not in any cluster");
  Decomposition d;
  d.assign = assign;
  d.clusters.resize(clusters.size());
  for (std::size_t s = 0; s < n; ++s) d.clusters[assign[s]].push_back(s);
  d.m = clusters.size();
  return d;
}

InteractionGraph graph_from_weights(const Eigen::MatrixXd& w) {
  InteractionGraph g;
  g.w = 0.5 * (w.cwiseAbs() + w.cwiseAbs().transpose());
  g.w.diagonal().setZero();
  g.mean_jacobian = w;
  g.pattern = w.cwiseAbs();
  return g;
}

InteractionGraph adjacency_from_jacobian(const NetworkSystem& sys, const std::vector<double>& xi, double ts) {
  const auto n = static_cast<Eigen::Index>(sys.n);
  InteractionGraph g;
  if (sys.kind == NetworkSystem::Kind::algebraic) {
    const std::vector<double> x = solve_equilibrium(sys, xi.data(), sys.x0);
    g.mean_jacobian = sys.jacobian_at(x.data(), xi.data(), 0.0);
    g.pattern = g.mean_jacobian.cwiseAbs();
  } else {
    TimeGrid grid = sys.time_grid();
    if (ts > 0.0) {
      const double frac = std::min(1.0, ts / sys.horizon);
      grid.horizon = ts;
      grid.steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(frac * static_cast<double>(sys.steps))));
    }
    const Trajectory traj = integrate(sys, xi.data(), grid);
    g.mean_jacobian = Eigen::MatrixXd::Zero(n, n);
    g.pattern = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> row(sys.n);
    for (std::size_t k = 0; k < grid.points(); ++k) {
      for (std::size_t j = 0; j < sys.n; ++j) row[j] = traj.x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
      const Eigen::MatrixXd jac = sys.jacobian_at(row.data(), xi.data(), grid.at(k));
      const double wk = (k == 0 || k == grid.steps) ? 0.5 : 1.0;
      g.mean_jacobian += wk * jac;
      g.pattern += wk * jac.cwiseAbs();
    }
    g.mean_jacobian /= static_cast<double>(grid.steps);
    g.pattern /= static_cast<double>(grid.steps);
  }
  g.w = 0.5 * (g.mean_jacobian.cwiseAbs() + g.mean_jacobian.cwiseAbs().transpose());
  g.w.diagonal().setZero();
  return g;
}

Eigen::MatrixXd normalized_laplacian(const InteractionGraph& g) {
  const auto n = g.w.rows();
  const Eigen::VectorXd deg = g.w.rowwise().sum();
  std::vector<std::size_t> isolated;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(deg[i] > 0.0)) isolated.push_back(static_cast<std::size_t>(i));
  if (!isolated.empty()) {
    std::string ids;
    for (std::size_t i : isolated) ids += (ids.empty() ? "" : ",") + std::to_string(i);
    throw Error(ErrorKind::isolated_node, "isolated nodes with zero degree: " + ids);
  }
  const Eigen::VectorXd s = deg.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd l = -(s.asDiagonal() * g.w * s.asDiagonal());
  l.diagonal().array() += 1.0;
  return 0.5 * (l + l.transpose());
}

std::size_t auto_cluster_count(const Eigen::VectorXd& lambda) {
  const auto n = static_cast<std::size_t>(lambda.size());
  std::size_t best = 1;
  double best_gap = -1.0;
  for (std::size_t m = 2; m <= n / 2; ++m) {
    const double lm = std::max(lambda[static_cast<Eigen::Index>(m - 1)], 0.0);
    const double gap = (lambda[static_cast<Eigen::Index>(m)] - lambda[static_cast<Eigen::Index>(m - 1)]) / (lm + 1e-12);
    if (gap > best_gap) {
      best_gap = gap;
      best = m;
    }
  }
  return best;
}

std::vector<std::size_t> kmeans_rows(const Eigen::MatrixXd& x, std::size_t m) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (m == 0 || m > n) throw Error(ErrorKind::invalid_argument, "cluster count must be in 1..n");
  auto dist2 = [&](std::size_t i, const Eigen::RowVectorXd& c) { return (x.row(static_cast<Eigen::Index>(i)) - c).squaredNorm(); };

  Eigen::MatrixXd centers(static_cast<Eigen::Index>(m), x.cols());
  centers.row(0) = x.row(0);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t k = 1; k < m; ++k) {
    std::size_t pick = 0;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], dist2(i, centers.row(static_cast<Eigen::Index>(k - 1))));
      if (nearest[i] > far) {
        far = nearest[i];
        pick = i;
      }
    }
    centers.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(pick));
  }

  std::vector<std::size_t> label(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < m; ++k) {
        const double d = dist2(i, centers.row(static_cast<Eigen::Index>(k)));
        if (d < bd) {
          bd = d;
          best = k;
        }
      }
      if (iter == 0 || best != label[i]) changed = true;
      label[i] = best;
    }
    if (!changed) break;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), x.cols());
    std::vector<std::size_t> count(m, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum.row(static_cast<Eigen::Index>(label[i])) += x.row(static_cast<Eigen::Index>(i));
      ++count[label[i]];
    }
    for (std::size_t k = 0; k < m; ++k)
      if (count[k] > 0) centers.row(static_cast<Eigen::Index>(k)) = sum.row(static_cast<Eigen::Index>(k)) / static_cast<double>(count[k]);
  }
  return label;
}

Decomposition spectral_partition(const InteractionGraph& g, std::size_t m) {
  const std::size_t n = g.size();
  if (m > n) throw Error(ErrorKind::invalid_argument, "requested more clusters than nodes");
  const Eigen::MatrixXd l = normalized_laplacian(g);
  const SymEigen eig = jacobi_eigen(l, 1e-12, 100);
  const std::size_t gap = auto_cluster_count(eig.values);
  if (m == 0) m = gap;

  const Eigen::VectorXd s = g.w.rowwise().sum().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd emb = s.asDiagonal() * eig.vectors.leftCols(static_cast<Eigen::Index>(m));
  const Eigen::VectorXd deg = g.w.rowwise().sum();
  for (Eigen::Index k = 0; k < emb.cols(); ++k) {
    const double norm = std::sqrt(emb.col(k).cwiseAbs2().dot(deg));
    if (norm > 0) emb.col(k) /= norm;
  }
  Decomposition d = decomposition_from_assign(kmeans_rows(emb, m));
  d.lambda = eig.values;
  d.gap_at = gap;
  d.embedding = emb;
  return d;
}

std::vector<std::vector<std::size_t>> connected_components(const Eigen::MatrixXd& w) {
  const auto n = static_cast<std::size_t>(w.rows());
  std::vector<int> comp(n, -1);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    out.emplace_back();
    std::vector<std::size_t> stack{s};
    comp[s] = static_cast<int>(out.size() - 1);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      out.back().push_back(u);
      for (std::size_t v = 0; v < n; ++v)
        if (comp[v] < 0 && w(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) > 0) {
          comp[v] = comp[s];
          stack.push_back(v);
        }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

WaveSpectrum wave_spectrum(const InteractionGraph& g, const WaveOptions& opt) {
  if (!(opt.c > 0.0) || opt.c >= std::sqrt(2.0))
    throw Error(ErrorKind::instability, "wave speed must satisfy 0 < c < sqrt(2)");
  if (opt.t_max < 8) throw Error(ErrorKind::invalid_argument, "wave clustering needs t_max >= 8");
  const std::size_t n = g.size();
  const std::size_t tmax = opt.t_max;
  const Eigen::VectorXd deg = g.w.rowwise().sum();
  for (std::size_t i = 0; i < n; ++i)
    if (!(deg[static_cast<Eigen::Index>(i)] > 0.0))
      throw Error(ErrorKind::isolated_node, "isolated node " + std::to_string(i));

  // local random-walk Laplacian rows
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].push_back({i, 1.0});
    for (std::size_t j = 0; j < n; ++j) {
      const double wij = g.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (j != i && wij != 0.0) rows[i].push_back({j, -wij / deg[static_cast<Eigen::Index>(i)]});
    }
  }

  std::mt19937_64 rng(derive_seed(opt.seed, kStreamWaveCluster));
  std::vector<double> prev2(n), prev1(n), cur(n);
  for (std::size_t i = 0; i < n; ++i) prev1[i] = prev2[i] = uniform01(rng);
  // history[t-1][i] = u_i(t), t = 1..tmax
  Eigen::MatrixXd history(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(tmax));
  const double c2 = opt.c * opt.c;
  for (std::size_t t = 1; t <= tmax; ++t) {
    for_each_index(opt.policy, n, [&](std::size_t i) {
      double lap = 0.0;
      for (const auto& [j, lij] : rows[i]) lap += lij * prev1[j];
      cur[i] = 2.0 * prev1[i] - prev2[i] - c2 * lap;
    });
    for (std::size_t i = 0; i < n; ++i) history(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t - 1)) = cur[i];
    std::swap(prev2, prev1);
    std::swap(prev1, cur);
  }

  const std::size_t half = tmax / 2;
  std::vector<std::complex<double>> twiddle(tmax);
  for (std::size_t k = 0; k < tmax; ++k)
    twiddle[k] = std::polar(1.0, -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(tmax));
  std::vector<double> window(tmax);
  for (std::size_t t = 0; t < tmax; ++t)
    window[t] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(t) / static_cast<double>(tmax));

  // per-node DFT of the windowed, mean-removed signal
  std::vector<std::vector<std::complex<double>>> spec(n, std::vector<std::complex<double>>(half + 1));
  for_each_index(opt.policy, n, [&](std::size_t i) {
    const auto row = history.row(static_cast<Eigen::Index>(i));
    const double mean = row.mean();
    std::vector<double> x(tmax);
    for (std::size_t t = 0; t < tmax; ++t) x[t] = window[t] * (row[static_cast<Eigen::Index>(t)] - mean);
    for (std::size_t f = 0; f <= half; ++f) {
      std::complex<double> acc = 0.0;
      std::size_t idx = 0;
      for (std::size_t t = 0; t < tmax; ++t) {
        acc += x[t] * twiddle[idx];
        idx += f;
        if (idx >= tmax) idx -= tmax;
      }
      spec[i][f] = acc;
    }
  });

  WaveSpectrum out;
  out.power.assign(half + 1, 0.0);
  for (std::size_t f = 0; f <= half; ++f)
    for (std::size_t i = 0; i < n; ++i) out.power[f] += std::norm(spec[i][f]);
  std::vector<double> sorted(out.power.begin() + 1, out.power.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];
  for (std::size_t f = 1; f < half; ++f)
    if (out.power[f] > out.power[f - 1] && out.power[f] >= out.power[f + 1] && out.power[f] > 5.0 * median)
      out.peaks.push_back(f);

  out.coefficients.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out.peaks.size()));
  for (std::size_t p = 0; p < out.peaks.size(); ++p) {
    const std::size_t f = out.peaks[p];
    const double theta = 2.0 * M_PI * static_cast<double>(f) / static_cast<double>(tmax);
    out.eigenvalues.push_back(2.0 * (1.0 - std::cos(theta)) / c2);
    std::size_t ref = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(spec[i][f]) > std::abs(spec[ref][f])) ref = i;
    const std::complex<double> align = std::polar(1.0, -std::arg(spec[ref][f]));
    for (std::size_t i = 0; i < n; ++i)
      out.coefficients(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = (spec[i][f] * align).real();
  }
  return out;
}

Decomposition wave_equation_cluster(const InteractionGraph& g, std::size_t m, const WaveOptions& opt) {
  const std::size_t n = g.size();
  if (m == 0 || m > n) throw Error(ErrorKind::invalid_argument, "cluster count must be in 1..n");
  const WaveSpectrum ws = wave_spectrum(g, opt);
  const Eigen::VectorXd deg = g.w.rowwise().sum();

  // zero modes do not oscillate; they are the connected-component indicators
  const auto comps = connected_components(g.w);
  Eigen::MatrixXd emb(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  std::size_t col = 0;
  for (const auto& c : comps) {
    if (col == m) break;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i : c) v[static_cast<Eigen::Index>(i)] = 1.0;
    emb.col(static_cast<Eigen::Index>(col++)) = v;
  }
  const std::size_t need = m - col;
  if (ws.peaks.size() < need)
    throw Error(ErrorKind::unresolved_peaks, "found " + std::to_string(ws.peaks.size()) + " spectral peaks, need " +
                                                 std::to_string(need) + "; increase t_max");
  for (std::size_t p = 0; p < need; ++p) emb.col(static_cast<Eigen::Index>(col++)) = ws.coefficients.col(static_cast<Eigen::Index>(p));
  for (Eigen::Index k = 0; k < emb.cols(); ++k) {
    const double norm = std::sqrt(emb.col(k).cwiseAbs2().dot(deg));
    if (norm > 0) emb.col(k) /= norm;
  }
  Decomposition d = decomposition_from_assign(kmeans_rows(emb, m));
  d.lambda.resize(static_cast<Eigen::Index>(comps.size() + ws.eigenvalues.size()));
  for (std::size_t k = 0; k < comps.size(); ++k) d.lambda[static_cast<Eigen::Index>(k)] = 0.0;
  for (std::size_t k = 0; k < ws.eigenvalues.size(); ++k)
    d.lambda[static_cast<Eigen::Index>(comps.size() + k)] = ws.eigenvalues[k];
  d.gap_at = m;
  d.embedding = emb;
  return d;
}

void derive_parameter_sets(Decomposition& d, const NetworkSystem& sys, const Eigen::MatrixXd& pattern) {
  const std::size_t m = d.m;
  d.local_params.assign(m, {});
  d.neighbors.assign(m, {});
  d.indirect_params.assign(m, {});
  d.sigma.assign(m, {});
  for (std::size_t i = 0; i < m; ++i) {
    std::set<std::size_t> lam, nbr;
    for (std::size_t s : d.clusters[i]) {
      for (std::size_t p : sys.params.owner[s]) lam.insert(p);
      for (std::size_t j = 0; j < sys.n; ++j)
        if (d.assign[j] != i && pattern(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) > 1e-12)
          nbr.insert(d.assign[j]);
    }
    d.local_params[i].assign(lam.begin(), lam.end());
    d.neighbors[i].assign(nbr.begin(), nbr.end());
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::set<std::size_t> ind, sig(d.local_params[i].begin(), d.local_params[i].end());
    for (std::size_t j : d.neighbors[i])
      for (std::size_t p : d.local_params[j])
        if (!sig.count(p)) ind.insert(p);
    d.indirect_params[i].assign(ind.begin(), ind.end());
    sig.insert(ind.begin(), ind.end());
    d.sigma[i].assign(sig.begin(), sig.end());
  }
}

}  // namespace pwr
