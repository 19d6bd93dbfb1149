#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Eigenvalues>

#include "pwr/error.hpp"
#include "pwr/kl.hpp"

using namespace pwr;

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Closed-form eigenvalues of sigma^2 exp(-|t-s|/b) on an interval of half-length a,
// from the even and odd transcendental equations.
std::vector<double> exponential_eigenvalues(double sigma, double b, double a, std::size_t count) {
  const double c = 1.0 / b;
  std::vector<double> out;
  for (int k = 0; out.size() < 2 * count; ++k) {
    const double pi = M_PI;
    const double e_lo = (k * pi + 1e-12) / a, e_hi = (k * pi + pi / 2 - 1e-12) / a;
    const double we = bisect([&](double w) { return c - w * std::tan(w * a); }, e_lo, e_hi);
    const double o_lo = (k * pi + pi / 2 + 1e-12) / a, o_hi = ((k + 1) * pi - 1e-12) / a;
    const double wo = bisect([&](double w) { return w + c * std::tan(w * a); }, o_lo, o_hi);
    for (double w : {we, wo}) out.push_back(2.0 * sigma * sigma * c / (c * c + w * w));
  }
  std::sort(out.rbegin(), out.rend());
  out.resize(count);
  return out;
}

// Midpoint Nystrom eigenvalues on q points.
std::vector<double> nystrom(const CovarianceKernel& k, int q) {
  Eigen::MatrixXd a(q, q);
  const double h = 1.0 / q;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) a(i, j) = h * k((i + 0.5) * h, (j + 0.5) * h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + q);
  std::sort(v.rbegin(), v.rend());
  return v;
}

}  // namespace

TEST_CASE("kernel shapes") {
  const auto e = CovarianceKernel::exponential(0.1, 0.1);
  CHECK(e(0.3, 0.3) == doctest::Approx(0.01));
  CHECK(e(0.2, 0.3) == doctest::Approx(0.01 * std::exp(-1.0)));
  CHECK(e(0.2, 0.3) == e(0.3, 0.2));
  const auto o = CovarianceKernel::occupancy(1.0, 20.0, 0.3, 0.7);
  CHECK(o.std_dev(0.5) == doctest::Approx(std::tanh(4.0)));
  CHECK(o.std_dev(0.0) < 0.01);
  CHECK(o(0.5, 0.5) == doctest::Approx(o.std_dev(0.5) * o.std_dev(0.5)));
  CHECK_THROWS_AS(CovarianceKernel::from_grid(Eigen::MatrixXd::Identity(1, 1)), Error);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(CovarianceKernel::from_grid(asym), Error);
}

TEST_CASE("shifted Legendre functions are orthonormal on the unit interval") {
  const int q = 400;
  const std::size_t m = 8;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  std::vector<double> v(m);
  for (int i = 0; i < q; ++i) {
    // Simpson would also do; the midpoint rule is enough at 1e-4
    shifted_legendre((i + 0.5) / q, m, v.data());
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) gram(a, b) += v[a] * v[b] / q;
  }
  CHECK((gram - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("constant kernel has a single mode") {
  const auto k = CovarianceKernel::from_grid(Eigen::MatrixXd::Constant(11, 11, 4.0));
  const KLModel model = kl_solve(k, 10, 3);
  CHECK(model.lambda[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::abs(model.lambda[1]) < 1e-12);
  CHECK(std::abs(model.mode(0, 0.37)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(variance_captured(model, k) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exponential kernel eigenvalues against closed form and Nystrom") {
  const auto k = CovarianceKernel::exponential(0.1, 0.1);
  const KLModel model = kl_solve(k, 30, 10);
  const auto exact = exponential_eigenvalues(0.1, 0.1, 0.5, 10);
  const auto ny = nystrom(k, 400);
  for (std::size_t n = 0; n < 10; ++n) {
    const double lam = model.lambda[static_cast<Eigen::Index>(n)];
    CHECK(std::abs(lam - exact[n]) <= 5e-3 * exact[n]);
    CHECK(std::abs(lam - ny[n]) <= 5e-3 * ny[n]);
    if (n > 0) CHECK(lam <= model.lambda[static_cast<Eigen::Index>(n - 1)]);
  }
  // the closed form and the oracle agree with each other
  for (std::size_t n = 0; n < 10; ++n) CHECK(std::abs(ny[n] - exact[n]) <= 1e-3 * exact[n]);
  CHECK(kernel_trace(k) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("modes are orthonormal in their coefficients") {
  const KLModel model = kl_solve(CovarianceKernel::exponential(1.0, 0.3), 20, 8);
  const Eigen::MatrixXd g = model.modes.transpose() * model.modes;
  CHECK((g - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("truncated kernel converges to the kernel") {
  const auto k = CovarianceKernel::exponential(1.0, 0.5);
  const KLModel model = kl_solve(k, 30, 30);
  const std::vector<double> t{0.1, 0.35, 0.6, 0.9};
  double prev = 1e300;
  for (std::size_t n : {2, 5, 10, 30}) {
    const Eigen::MatrixXd r = truncated_kernel(model, t, n);
    double err = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t j = 0; j < t.size(); ++j)
        err = std::max(err, std::abs(r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - k(t[i], t[j])));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("sample paths reproduce the truncated covariance") {
  const auto k = CovarianceKernel::exponential(1.0, 0.3);
  const KLModel model = kl_solve(k, 20, 6, 2.5);
  const std::vector<double> t{0.2, 0.5, 0.8};
  const Eigen::MatrixXd expect = truncated_kernel(model, t, 6);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  const int draws = 40000;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  std::vector<double> z(6);
  for (int s = 0; s < draws; ++s) {
    for (auto& v : z) v = g(rng);
    const auto path = kl_sample(model, z, t);
    Eigen::Vector3d y(path[0] - 2.5, path[1] - 2.5, path[2] - 2.5);
    mean += y / draws;
    cov += y * y.transpose() / draws;
  }
  CHECK(mean.cwiseAbs().maxCoeff() < 0.03);
  CHECK((cov - expect).cwiseAbs().maxCoeff() < 0.04);
  CHECK(kl_sample(model, std::vector<double>(6, 0.0), t) == std::vector<double>(3, 2.5));
  CHECK_THROWS_AS(kl_sample(model, {1.0}, t), Error);
}

TEST_CASE("empty truncation and degenerate kernels") {
  const auto k = CovarianceKernel::exponential(0.1, 0.1);
  const KLModel none = kl_solve(k, 10, 0);
  CHECK(variance_captured(none, k) == 0.0);
  CHECK_THROWS_AS(kl_solve(k, 0, 0), Error);
  CHECK_THROWS_AS(kl_solve(k, 5, 6), Error);

  const auto flat = CovarianceKernel::occupancy(1.0, 20.0, 0.3, 0.3);
  CHECK(kernel_trace(flat) == 0.0);
  try {
    variance_captured(kl_solve(flat, 10, 3), flat);
    FAIL("expected zero trace");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::zero_trace);
  }
}

TEST_CASE("captured variance grows with the truncation") {
  const auto k = CovarianceKernel::exponential(0.1, 0.1);
  double prev = 0.0;
  for (std::size_t n = 1; n <= 30; ++n) {
    const double v = variance_captured(kl_solve(k, 30, n), k);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(prev > 0.9);
}
