#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "pwr/baselines.hpp"
#include "pwr/error.hpp"
#include "pwr/graph.hpp"
#include "pwr/models.hpp"
#include "pwr/pwr.hpp"

using namespace pwr;

namespace {

Decomposition singletons(const NetworkSystem& sys) {
  std::vector<std::size_t> assign(sys.n);
  std::iota(assign.begin(), assign.end(), 0);
  Decomposition d = decomposition_from_assign(assign);
  const InteractionGraph g = adjacency_from_jacobian(sys, sys.params.means());
  derive_parameter_sets(d, sys, g.pattern);
  return d;
}

// x_i' = -k_i x_i + xi_i with xi_i uniform on [-1,1]; optional chain coupling c.
NetworkSystem linear_chain(std::size_t n, double c, std::size_t steps = 100) {
  LinearSpec s;
  s.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  s.g = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    s.a(ii, ii) = -1.0 - 0.5 * static_cast<double>(i);
    if (i + 1 < n) {
      s.a(ii, ii + 1) = c;
      s.a(ii + 1, ii) = c;
    }
    s.params.push_back(Distribution::uniform());
    s.x0.push_back(1.0);
  }
  s.horizon = 1.0;
  s.steps = steps;
  return linear_system(s);
}

// time x state means of the merged surrogate
Eigen::MatrixXd surrogate_means(const PwrResult& r, std::size_t n) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(r.grid.points()), static_cast<Eigen::Index>(n));
  for (const auto& sub : r.subsystems) {
    const Eigen::MatrixXd m = sub.mean();
    for (std::size_t s = 0; s < sub.states.size(); ++s)
      out.col(static_cast<Eigen::Index>(sub.states[s])) = m.col(static_cast<Eigen::Index>(s));
  }
  return out;
}

Eigen::MatrixXd pcm_state_means(const PcmResult& r, std::size_t n, std::size_t points) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(points), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < points; ++k)
    for (std::size_t s = 0; s < n; ++s)
      out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s)) = r.state_coeffs(0, static_cast<Eigen::Index>(k * n + s));
  return out;
}

}  // namespace

TEST_CASE("decoupled subsystems converge at once and match full-grid collocation") {
  const NetworkSystem sys = linear_chain(3, 0.0);
  const Decomposition d = singletons(sys);
  for (std::size_t i = 0; i < 3; ++i) CHECK(d.neighbors[i].empty());
  PwrConfig cfg;
  cfg.ls = 3;
  const PwrResult r = pwr_nonintrusive(sys, d, cfg);
  CHECK(r.report.iterations == 1);
  CHECK(r.report.converged);
  PcmOptions po;
  po.level = 3;
  const PcmResult ref = full_grid_pcm(sys, po);
  CHECK((surrogate_means(r, 3) - pcm_state_means(ref, 3, r.grid.points())).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((r.stats.mean - ref.stats.mean).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((r.stats.var - ref.stats.var).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("coupled linear chain agrees with full-grid collocation") {
  const NetworkSystem sys = linear_chain(4, 0.3);
  const Decomposition d = singletons(sys);
  PwrConfig cfg;
  cfg.ls = 3;
  cfg.lc = 3;
  cfg.eps = 1e-10;
  const PwrResult r = pwr_nonintrusive(sys, d, cfg);
  CHECK(r.report.converged);
  PcmOptions po;
  po.level = 3;
  const PcmResult ref = full_grid_pcm(sys, po);
  // linear in the parameters, so only parameters beyond the neighbors are lost
  CHECK((surrogate_means(r, 4) - pcm_state_means(ref, 4, r.grid.points())).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((r.stats.mean - ref.stats.mean).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((r.stats.var - ref.stats.var).cwiseAbs().maxCoeff() < 1e-3 * ref.stats.var.maxCoeff());
}

TEST_CASE("oscillator chain agrees with full-grid collocation") {
  const NetworkSystem sys = kuramoto_chain3(0.05, 0.2, 1.0, 200);
  const Decomposition d = singletons(sys);
  PwrConfig cfg;
  cfg.ls = 4;
  cfg.lc = 3;
  cfg.eps = 1e-8;
  const PwrResult r = pwr_nonintrusive(sys, d, cfg);
  CHECK(r.report.converged);
  PcmOptions po;
  po.level = 4;
  const PcmResult ref = full_grid_pcm(sys, po);
  for (Eigen::Index o = 0; o < ref.stats.mean.cols(); ++o) {
    CHECK((r.stats.mean.col(o) - ref.stats.mean.col(o)).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((r.stats.var.col(o) - ref.stats.var.col(o)).cwiseAbs().maxCoeff() < 1e-2 * ref.stats.var.col(o).maxCoeff() + 1e-12);
  }
}

TEST_CASE("evaluation count follows the grid sizes") {
  const NetworkSystem sys = kuramoto_chain3(0.1, 0.2, 0.5, 100);
  const Decomposition d = singletons(sys);
  PwrConfig cfg;
  cfg.ls = 4;
  cfg.lc = 2;
  cfg.eps = 1e-6;
  const PwrResult r = pwr_nonintrusive(sys, d, cfg);
  CHECK(r.report.first_grid_sizes == std::vector<std::size_t>{4, 4, 4});
  // Sigma of the middle subsystem has all three parameters, the ends two
  CHECK(r.report.grid_sizes == std::vector<std::size_t>{8, 16, 8});
  CHECK(BigInt(r.report.evaluations) ==
        expected_evaluations(r.report.first_grid_sizes, r.report.grid_sizes, r.report.iterations));
  CHECK(r.report.predicted_evaluations == BigInt(r.report.evaluations));
  CHECK(expected_evaluations({4, 4}, {8, 8}, 3) == 1 + 8 + 2 * 16);
  CHECK(r.report.changes.size() == r.report.iterations);
  CHECK(r.report.history.size() == r.report.iterations);
}

TEST_CASE("stability problem iterations grow with coupling") {
  std::vector<std::size_t> its;
  for (double c : {0.1, 1.0, 2.8}) {
    StabilitySpec spec;
    spec.c = c;
    const NetworkSystem sys = stability_system(spec);
    Decomposition d = decomposition_from_clusters({{0}, {1}}, 2);
    derive_parameter_sets(d, sys, Eigen::MatrixXd::Ones(2, 2));
    PwrConfig cfg;
    cfg.ls = 5;
    cfg.lc = 3;
    cfg.local_order = {5, 5};
    cfg.indirect_order = {3, 3};
    cfg.eps = 1e-4;
    const PwrResult r = pwr_nonintrusive(sys, d, cfg);
    CHECK(r.report.converged);
    CHECK(r.report.changes.back() < 1e-4);
    its.push_back(r.report.iterations);
  }
  CHECK(its[0] < its[1]);
  CHECK(its[1] < its[2]);
}

TEST_CASE("intrusive and non-intrusive agree on linear networks") {
  const NetworkSystem sys = linear_chain(4, 0.3);
  const Decomposition d = singletons(sys);
  PwrConfig cfg;
  cfg.ls = 3;
  cfg.lc = 3;
  cfg.eps = 1e-10;
  const PwrResult a = pwr_nonintrusive(sys, d, cfg);
  IntrusiveOptions io;
  io.awr.wr.eps = 1e-10;
  const PwrResult b = pwr_intrusive(sys, d, cfg, io);
  CHECK(b.report.converged);
  CHECK((surrogate_means(a, 4) - surrogate_means(b, 4)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((a.stats.var - b.stats.var).cwiseAbs().maxCoeff() < 1e-6);

  io.adaptive = true;
  const PwrResult c = pwr_intrusive(sys, d, cfg, io);
  CHECK(c.report.relaxation.windows.size() >= 2);
  CHECK((surrogate_means(b, 4) - surrogate_means(c, 4)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("sampling baselines on a drifting oscillator") {
  KuramotoSpec s;
  s.coupling = Eigen::MatrixXd::Zero(1, 1);
  s.omega = {1.0};
  s.uncertain = {true};
  s.tolerance = 0.2;
  s.x0 = {0.0};
  s.horizon = 1.0;
  s.steps = 10;
  NetworkSystem sys = kuramoto(s);
  sys.observables = {{"x", [](const double* x, const double*, double) { return x[0]; }}};
  const SamplingResult mc = mc_run(sys, 4000, 7);
  const double se = mc.std_error(10, 0);
  CHECK(se == doctest::Approx(0.2 / std::sqrt(4000.0)).epsilon(0.05));
  CHECK(std::abs(mc.stats.mean(10, 0) - 1.0) < 3 * se);
  CHECK(mc.stats.var(10, 0) == doctest::Approx(0.04).epsilon(0.1));
  const SamplingResult qmc = qmc_run(sys, 4000);
  CHECK(std::abs(qmc.stats.mean(10, 0) - 1.0) < 1e-3);
  CHECK(std::abs(qmc.stats.mean(10, 0) - 1.0) < std::abs(mc.stats.mean(10, 0) - 1.0) + 1e-12);
  CHECK(mc.evaluations == 4000);
  CHECK_THROWS_AS(mc_run(sys, 0, 1), Error);
  const SamplingResult again = mc_run(sys, 4000, 7);
  CHECK(again.stats.mean == mc.stats.mean);
  CHECK(mc_run(sys, 4000, 8).stats.mean != mc.stats.mean);
}

TEST_CASE("full-grid collocation of a one-parameter decay") {
  LinearSpec s;
  s.a = Eigen::MatrixXd::Zero(1, 1);
  s.g = Eigen::MatrixXd::Zero(1, 0);
  s.x0 = {1.0};
  s.horizon = 1.0;
  s.steps = 200;
  NetworkSystem sys = linear_system(s);
  sys.params = ParameterSpace{};
  sys.params.add(Distribution::uniform(), "k");
  sys.params.owner.assign(1, {0});
  // x' = -xi x, so x(1) = exp(-xi) with mean sinh(1) and second moment sinh(2)/2
  sys.rhs_rows = [](std::span<const std::size_t>, const double* x, const double* xi, double, double* out) {
    out[0] = -xi[0] * x[0];
  };
  sys.jacobian = nullptr;
  sys.observables = {{"x", [](const double* x, const double*, double) { return x[0]; }}};
  PcmOptions po;
  po.level = 8;
  const PcmResult r = full_grid_pcm(sys, po);
  CHECK(r.evaluations == 8);
  const double mean = std::sinh(1.0), m2 = std::sinh(2.0) / 2.0;
  CHECK(r.stats.mean(200, 0) == doctest::Approx(mean).epsilon(1e-9));
  CHECK(r.stats.var(200, 0) == doctest::Approx(m2 - mean * mean).epsilon(1e-6));
  REQUIRE(r.stats.histograms.size() == 1);
  std::size_t total = 0;
  for (auto c : r.stats.histograms[0].counts) total += c;
  CHECK(total <= 4096);
  CHECK(total > 4000);
}

TEST_CASE("full-grid collocation refuses forty parameters") {
  const NetworkSystem sys = kuramoto80(1);
  PcmOptions po;
  po.level = 2;
  try {
    full_grid_pcm(sys, po);
    FAIL("expected refusal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::grid_too_large);
    CHECK(std::string(e.what()).find("1099511627776") != std::string::npos);
  }
}

TEST_CASE("predicted cost") {
  const CostPrediction one = predicted_cost({5, 5}, 5, 5, 1, 0);
  CHECK(one.full == BigInt(9765625));
  CHECK(one.pwr == BigInt(1 + 3125 + 3125));
  const CostPrediction c = predicted_cost({2, 3}, 3, 3, 2, 4);
  // 1 + (9 + 27) + 4 * (9 * 8 + 27 * 4)
  CHECK(c.pwr == BigInt(1 + 36 + 4 * (72 + 108)));
  CHECK(c.full == BigInt(243));
  CHECK(c.ratio == doctest::Approx(243.0 / 757.0));
  for (int imax : {10, 50, 100}) {
    double prev = 0.0;
    for (int m = 2; m <= 12; ++m) {
      const CostPrediction p = predicted_cost(std::vector<int>(static_cast<std::size_t>(m), 5), 5, 5, 3, imax);
      CHECK(p.ratio > prev);
      prev = p.ratio;
    }
  }
}

TEST_CASE("histograms and streaming moments") {
  const Histogram h = make_histogram("z", {0.0, 0.1, -0.1, 10.0}, 0.0, 0.01, 10);
  CHECK(h.lo == doctest::Approx(-0.4));
  CHECK(h.hi == doctest::Approx(0.4));
  std::size_t total = 0;
  for (auto c : h.counts) total += c;
  CHECK(total == 3);
  const Histogram flat = make_histogram("c", {2.0, 2.0}, 2.0, 0.0, 4);
  CHECK(flat.hi > flat.lo);

  MomentAccumulator acc(1, 1);
  for (double v : {1.0, 2.0, 4.0}) acc.add(Eigen::MatrixXd::Constant(1, 1, v));
  CHECK(acc.mean()(0, 0) == doctest::Approx(7.0 / 3.0));
  CHECK(acc.variance()(0, 0) == doctest::Approx(7.0 / 3.0));
}
