#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pwr/error.hpp"
#include "pwr/linalg.hpp"
#include "pwr/models.hpp"
#include "pwr/relaxation.hpp"
#include "test_support.hpp"

using namespace pwr;

namespace {

Decomposition halves(std::size_t k) {
  std::vector<std::size_t> a, b;
  for (std::size_t i = 0; i < k; ++i) {
    a.push_back(i);
    b.push_back(i + k);
  }
  return decomposition_from_clusters({a, b}, 2 * k);
}

double sup_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("waveform interpolation and distance") {
  const TimeGrid g{0.0, 1.0, 4};
  const Waveform c = Waveform::constant(g, {1.0, -2.0});
  CHECK(c.x.rows() == 5);
  CHECK(c.dx.cwiseAbs().maxCoeff() == 0.0);
  double v[2];
  c.interpolate(0.37, v);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == -2.0);
  Waveform d = c;
  d.x(3, 1) += 0.25;
  CHECK(sup_distance(c, d) == 0.25);
}

TEST_CASE("relaxation converges to the monolithic solution") {
  const NetworkSystem sys = testing::two_block_linear(3, 0.4, 2.0, 1000);
  const Decomposition d = halves(3);
  WrOptions opt;
  opt.eps = 1e-10;
  WrReport rep;
  const Trajectory wr = wr_solve(sys, d, {}, opt, rep);
  CHECK(rep.converged);
  const Trajectory mono = integrate(sys, nullptr);
  CHECK(sup_diff(wr.x, mono.x) < 1e-9);
  // errors shrink superlinearly once past the first few sweeps
  for (std::size_t i = 4; i < rep.errors.size(); ++i) CHECK(rep.errors[i] < rep.errors[i - 1]);
}

TEST_CASE("single block relaxation is exact after one sweep") {
  const NetworkSystem sys = testing::two_block_linear(2, 0.8, 1.0, 100);
  const Decomposition one = decomposition_from_assign(std::vector<std::size_t>(4, 0));
  WrOptions opt;
  WrReport rep;
  const Trajectory wr = wr_solve(sys, one, {}, opt, rep);
  CHECK(rep.iterations == 2);
  CHECK(rep.errors[1] == 0.0);
  CHECK(sup_diff(wr.x, integrate(sys, nullptr).x) == 0.0);
}

TEST_CASE("iteration error obeys the factorial bound") {
  for (double c : {0.4, 0.8}) {
    const double horizon = 2.0;
    const NetworkSystem sys = testing::two_block_linear(3, c, horizon, 400);
    const Decomposition d = halves(3);
    WrOptions opt;
    opt.eps = 1e-14;
    opt.max_iter = 60;
    opt.keep_iterates = true;
    WrReport rep;
    wr_solve(sys, d, {}, opt, rep);
    const Waveform& fixed = rep.iterates.back();

    const Eigen::MatrixXd a = sys.jacobian_at(sys.x0.data(), nullptr, 0.0);
    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(a.rows(), a.cols()), off = a;
    diag.topLeftCorner(3, 3) = a.topLeftCorner(3, 3);
    diag.bottomRightCorner(3, 3) = a.bottomRightCorner(3, 3);
    off -= diag;
    const double mu = inf_norm(diag), eta = inf_norm(off);

    const double e0 = sup_distance(rep.iterates[0], fixed);
    double fact = 1.0;
    for (std::size_t i = 1; i <= 15 && i < rep.iterates.size(); ++i) {
      fact *= static_cast<double>(i);
      const double bound = std::exp(mu * horizon) * std::pow(eta * horizon, static_cast<double>(i)) / fact * e0;
      CHECK(sup_distance(rep.iterates[i], fixed) <= 1.1 * bound);
    }
  }
}

TEST_CASE("stronger coupling needs at least as many sweeps") {
  std::size_t prev = 0;
  for (double c : {0.1, 0.4, 0.8}) {
    const NetworkSystem sys = testing::two_block_linear(3, c, 2.0, 400);
    WrOptions opt;
    WrReport rep;
    wr_solve(sys, halves(3), {}, opt, rep);
    CHECK(rep.converged);
    CHECK(rep.iterations >= prev);
    prev = rep.iterations;
  }
}

TEST_CASE("adaptive windows tile the horizon and match plain relaxation") {
  const NetworkSystem sys = testing::two_block_linear(3, 0.8, 4.0, 1000);
  const Decomposition d = halves(3);
  AwrOptions opt;
  opt.wr.eps = 1e-9;
  WrReport awr;
  const Trajectory adaptive = awr_windows(sys, d, {}, opt, awr);
  CHECK(awr.converged);
  REQUIRE(awr.windows.size() >= 2);
  CHECK(awr.windows.front().first == 0.0);
  CHECK(awr.windows.back().second == doctest::Approx(4.0).epsilon(1e-14));
  for (std::size_t w = 0; w < awr.windows.size(); ++w) {
    if (w > 0) CHECK(awr.windows[w].first == awr.windows[w - 1].second);
    CHECK(awr.windows[w].second - awr.windows[w].first >= 4.0 / 50.0 - 1e-12);
  }
  WrReport plain;
  const Trajectory wr = wr_solve(sys, d, {}, opt.wr, plain);
  CHECK(sup_diff(adaptive.x, wr.x) < 10 * opt.wr.eps);
  CHECK(sup_diff(adaptive.x, integrate(sys, nullptr).x) < 10 * opt.wr.eps);
}

TEST_CASE("a large minimum window is honored") {
  const NetworkSystem sys = testing::two_block_linear(2, 0.4, 1.0, 100);
  AwrOptions opt;
  opt.min_window = 0.3;
  opt.initial_window = 0.05;
  WrReport rep;
  awr_windows(sys, halves(2), {}, opt, rep);
  for (const auto& [a, b] : rep.windows) CHECK(b - a >= 0.3 - 1e-12);
}

TEST_CASE("window proposals stay between half and double the previous length") {
  const std::vector<double> nodes{1.0, 0.9, 0.8};
  for (double coeff : {0.0, 1e-6, 1.0, 1e6}) {
    const double next = awr_next_window(0.1, coeff, nodes, 1.0, 2.0, 0.8, 5, 1e-8);
    CHECK(next <= 0.2 + 1e-15);
    CHECK(next >= 0.05 - 1e-15);
  }
  CHECK(awr_next_window(0.1, 0.0, nodes, 1.0, 2.0, 0.8, 5, 1e-8) == doctest::Approx(0.2));
  CHECK(awr_next_window(0.1, 1e6, nodes, 1.0, 2.0, 0.8, 5, 1e-8) < 0.2);
}

TEST_CASE("relaxation on oscillator and thermal networks") {
  {
    const NetworkSystem sys = kuramoto_chain3(0.3);
    const auto xi = sys.params.means();
    const Decomposition d = decomposition_from_clusters({{0}, {1}, {2}}, 3);
    WrOptions opt;
    opt.eps = 1e-10;
    WrReport rep;
    const Trajectory wr = wr_solve(sys, d, xi, opt, rep);
    CHECK(rep.converged);
    CHECK(sup_diff(wr.x, integrate(sys, xi.data()).x) < 1e-8);
  }
  {
    ThermalLayout lay;
    ThermalSpec spec;
    spec.steps = 400;
    const NetworkSystem sys = thermal_rc(spec, &lay);
    const auto xi = sys.params.means();
    std::vector<std::vector<std::size_t>> zones(2);
    for (std::size_t s = 0; s < sys.n; ++s) zones[lay.zone_of[s]].push_back(s);
    const Decomposition d = decomposition_from_clusters(zones, sys.n);
    WrOptions opt;
    opt.eps = 1e-9;
    WrReport rep;
    const Trajectory wr = wr_solve(sys, d, xi, opt, rep);
    CHECK(rep.converged);
    CHECK(sup_diff(wr.x, integrate(sys, xi.data()).x) < 1e-9 * 300.0 * 10.0);
  }
}

TEST_CASE("block Jacobi for algebraic networks") {
  const NetworkSystem sys = stability_system(StabilitySpec{});
  const std::vector<double> xi{10.0, 10.0};
  const Decomposition d = decomposition_from_clusters({{0}, {1}}, 2);
  WrOptions opt;
  opt.eps = 1e-12;
  WrReport rep;
  const auto x = relax_algebraic(sys, d, xi, opt, rep);
  CHECK(rep.converged);
  const auto ref = solve_equilibrium(sys, xi.data(), sys.x0);
  CHECK(std::abs(x[0] - ref[0]) < 1e-11);
  CHECK(std::abs(x[1] - ref[1]) < 1e-11);
}

TEST_CASE("serial and parallel sweeps agree exactly") {
  const NetworkSystem sys = testing::two_block_linear(4, 0.5, 1.0, 200);
  WrOptions s, p;
  p.policy = ExecPolicy::parallel;
  WrReport rs, rp;
  const Trajectory a = wr_solve(sys, halves(4), {}, s, rs);
  const Trajectory b = wr_solve(sys, halves(4), {}, p, rp);
  CHECK(a.x == b.x);
  CHECK(rs.errors == rp.errors);
}
