#include "pwr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "pwr/error.hpp"
#include "pwr/sampling.hpp"

namespace pwr {

Histogram make_histogram(const std::string& name, const std::vector<double>& values, double mean, double var,
                         std::size_t bins) {
  Histogram h;
  h.name = name;
  const double sd = std::sqrt(std::max(var, 0.0));
  const double half = sd > 0 ? 4.0 * sd : std::max(1e-12, 1e-9 * std::abs(mean));
  h.lo = mean - half;
  h.hi = mean + half;
  h.counts.assign(bins, 0);
  const double width = (h.hi - h.lo) / static_cast<double>(bins);
  for (double v : values) {
    if (v < h.lo || v > h.hi) continue;
    auto b = static_cast<std::size_t>((v - h.lo) / width);
    if (b >= bins) b = bins - 1;
    ++h.counts[b];
  }
  return h;
}

MomentAccumulator::MomentAccumulator(Eigen::Index rows, Eigen::Index cols)
    : mean_(Eigen::MatrixXd::Zero(rows, cols)), m2_(Eigen::MatrixXd::Zero(rows, cols)) {}

void MomentAccumulator::add(const Eigen::MatrixXd& sample) {
  ++n_;
  const Eigen::MatrixXd delta = sample - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta.cwiseProduct(sample - mean_);
}

Eigen::MatrixXd MomentAccumulator::variance() const {
  if (n_ < 2) return Eigen::MatrixXd::Zero(mean_.rows(), mean_.cols());
  return m2_ / static_cast<double>(n_ - 1);
}

namespace {

TimeGrid output_grid(const NetworkSystem& sys) {
  return sys.kind == NetworkSystem::Kind::ode ? sys.time_grid() : TimeGrid{0.0, 0.0, 0};
}

// Runs the model at a list of parameter points in chunks; accumulation is
// serial in point order so results do not depend on the thread count.
SamplingResult run_points(const NetworkSystem& sys, std::size_t count,
                          const std::function<void(std::size_t, double*)>& point, ExecPolicy policy,
                          std::size_t bins) {
  const TimeGrid grid = output_grid(sys);
  const auto rows = static_cast<Eigen::Index>(grid.points());
  const auto cols = static_cast<Eigen::Index>(sys.observables.size());
  MomentAccumulator acc(rows, cols);
  std::vector<std::vector<double>> final_values(sys.observables.size());
  const std::size_t chunk = 256;
  const std::size_t p = sys.params.size();
  std::vector<double> xi_all;
  std::vector<Eigen::MatrixXd> out;
  for (std::size_t begin = 0; begin < count; begin += chunk) {
    const std::size_t len = std::min(chunk, count - begin);
    xi_all.assign(len * p, 0.0);
    for (std::size_t k = 0; k < len; ++k) point(begin + k, &xi_all[k * p]);
    out.assign(len, Eigen::MatrixXd());
    for_each_index(policy, len, [&](std::size_t k) {
      const double* xi = &xi_all[k * p];
      out[k] = eval_observables(sys, solve_sample(sys, xi), xi);
    });
    for (std::size_t k = 0; k < len; ++k) {
      acc.add(out[k]);
      for (Eigen::Index o = 0; o < cols; ++o) final_values[static_cast<std::size_t>(o)].push_back(out[k](rows - 1, o));
    }
  }
  SamplingResult res;
  res.evaluations = count;
  res.stats.grid = grid;
  for (const auto& o : sys.observables) res.stats.names.push_back(o.name);
  res.stats.mean = acc.mean();
  res.stats.var = acc.variance();
  res.std_error = (res.stats.var / static_cast<double>(std::max<std::size_t>(count, 1))).cwiseSqrt();
  for (Eigen::Index o = 0; o < cols; ++o)
    res.stats.histograms.push_back(make_histogram(res.stats.names[static_cast<std::size_t>(o)],
                                                  final_values[static_cast<std::size_t>(o)],
                                                  res.stats.mean(rows - 1, o), res.stats.var(rows - 1, o), bins));
  return res;
}

}  // namespace

SamplingResult mc_run(const NetworkSystem& sys, std::size_t samples, std::uint64_t seed, ExecPolicy policy,
                      std::size_t bins) {
  if (samples < 1) throw Error(ErrorKind::invalid_argument, "Monte Carlo needs at least one sample");
  std::mt19937_64 rng(derive_seed(seed, kStreamMonteCarlo));
  const std::size_t p = sys.params.size();
  // draws are generated serially in point order
  return run_points(
      sys, samples,
      [&](std::size_t, double* xi) {
        for (std::size_t k = 0; k < p; ++k) {
          double u = uniform01(rng);
          while (u <= 0.0) u = uniform01(rng);
          xi[k] = from_uniform(sys.params.params[k], u);
        }
      },
      policy, bins);
}

SamplingResult qmc_run(const NetworkSystem& sys, std::size_t samples, ExecPolicy policy, std::size_t bins) {
  if (samples < 1) throw Error(ErrorKind::invalid_argument, "QMC needs at least one sample");
  const std::size_t p = sys.params.size();
  if (p > kSobolMaxDims)
    throw Error(ErrorKind::dimension_too_large, "QMC supports at most " + std::to_string(kSobolMaxDims) + " parameters");
  if (p == 0) return run_points(sys, samples, [](std::size_t, double*) {}, policy, bins);
  Sobol sobol(p);
  std::vector<double> u(p);
  return run_points(
      sys, samples,
      [&](std::size_t, double* xi) {
        sobol.next(u.data());
        for (std::size_t k = 0; k < p; ++k) xi[k] = from_uniform(sys.params.params[k], u[k]);
      },
      policy, bins);
}

PcmResult full_grid_pcm(const NetworkSystem& sys, const PcmOptions& opt) {
  const std::size_t p = sys.params.size();
  std::vector<std::size_t> all(p);
  std::iota(all.begin(), all.end(), 0);
  const CollocationGrid grid = tensor_grid(sys.params, all, std::vector<int>(p, opt.level));
  const std::size_t q_count = grid.size(opt.q_max);
  const int total = opt.total_order >= 0 ? opt.total_order : opt.level - 1;

  PcmResult res;
  res.basis = p == 0 ? OrthoBasis::constant() : OrthoBasis(sys.params, all, std::vector<int>(p, total), total);
  const TimeGrid tg = output_grid(sys);
  const std::size_t points = tg.points();
  const std::size_t n = sys.n, no = sys.observables.size();

  Eigen::MatrixXd states(static_cast<Eigen::Index>(q_count), static_cast<Eigen::Index>(points * n));
  Eigen::MatrixXd obs(static_cast<Eigen::Index>(q_count), static_cast<Eigen::Index>(points * no));
  for_each_index(opt.policy, q_count, [&](std::size_t q) {
    std::vector<double> xi(p);
    grid.node(q, xi.data());
    const Trajectory traj = solve_sample(sys, xi.data());
    const Eigen::MatrixXd o = eval_observables(sys, traj, xi.data());
    for (std::size_t k = 0; k < points; ++k) {
      for (std::size_t s = 0; s < n; ++s)
        states(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(k * n + s)) =
            traj.x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s));
      for (std::size_t j = 0; j < no; ++j)
        obs(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(k * no + j)) =
            o(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
    }
  });
  res.evaluations = q_count;
  res.state_coeffs = pseudo_spectral_coeffs(states, grid, res.basis, opt.policy).coeffs;
  res.observable_coeffs = pseudo_spectral_coeffs(obs, grid, res.basis, opt.policy).coeffs;

  res.stats.grid = tg;
  for (const auto& o : sys.observables) res.stats.names.push_back(o.name);
  const Moments mo = moments(GpcExpansion{res.basis, res.observable_coeffs});
  res.stats.mean.resize(static_cast<Eigen::Index>(points), static_cast<Eigen::Index>(no));
  res.stats.var.resize(static_cast<Eigen::Index>(points), static_cast<Eigen::Index>(no));
  for (std::size_t k = 0; k < points; ++k)
    for (std::size_t j = 0; j < no; ++j) {
      res.stats.mean(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = mo.mean[static_cast<Eigen::Index>(k * no + j)];
      res.stats.var(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = mo.var[static_cast<Eigen::Index>(k * no + j)];
    }

  // histograms from the final-time surrogate at Sobol points
  if (p > 0 && p <= kSobolMaxDims && opt.hist_samples > 0) {
    Sobol sobol(p);
    std::vector<double> u(p), xi(p);
    Eigen::VectorXd psi(static_cast<Eigen::Index>(res.basis.size()));
    std::vector<std::vector<double>> vals(no);
    const auto last = static_cast<Eigen::Index>((points - 1) * no);
    for (std::size_t s = 0; s < opt.hist_samples; ++s) {
      sobol.next(u.data());
      for (std::size_t k = 0; k < p; ++k) xi[k] = from_uniform(sys.params.params[k], u[k]);
      res.basis.eval_all(xi.data(), psi.data());
      for (std::size_t j = 0; j < no; ++j)
        vals[j].push_back(psi.dot(res.observable_coeffs.col(last + static_cast<Eigen::Index>(j))));
    }
    for (std::size_t j = 0; j < no; ++j)
      res.stats.histograms.push_back(make_histogram(res.stats.names[j], vals[j],
                                                    res.stats.mean(static_cast<Eigen::Index>(points - 1), static_cast<Eigen::Index>(j)),
                                                    res.stats.var(static_cast<Eigen::Index>(points - 1), static_cast<Eigen::Index>(j)), opt.bins));
  }
  return res;
}

CostPrediction predicted_cost(const std::vector<int>& p, int l, int ls, int lc, int i_max) {
  using boost::multiprecision::pow;
  CostPrediction c;
  int total = 0;
  for (int pi : p) total += pi;
  c.full = pow(BigInt(l), static_cast<unsigned>(total));
  BigInt local = 0, coupled = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const BigInt own = pow(BigInt(ls), static_cast<unsigned>(p[i]));
    local += own;
    BigInt prod = 1;
    for (std::size_t j = 0; j < p.size(); ++j)
      if (j != i) prod *= pow(BigInt(lc), static_cast<unsigned>(p[j]));
    coupled += own * prod;
  }
  c.pwr = 1 + local + BigInt(i_max) * coupled;
  using Float = boost::multiprecision::cpp_bin_float_50;
  c.ratio = static_cast<double>(Float(c.full) / Float(c.pwr));
  return c;
}

}  // namespace pwr
