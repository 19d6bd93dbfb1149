#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "pwr/error.hpp"
#include "pwr/multi_index.hpp"
#include "pwr/ortho_basis.hpp"
#include "pwr/quadrature.hpp"

using namespace pwr;

namespace {

ParameterSpace space_of(const std::vector<Distribution>& ds) {
  ParameterSpace s;
  for (std::size_t k = 0; k < ds.size(); ++k) s.add(ds[k], "p" + std::to_string(k));
  return s;
}

// Legendre via Bonnet's recursion, scaled to unit variance under the uniform density.
double legendre_oracle(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return 1.0;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return std::sqrt(2.0 * n + 1.0) * p1;
}

// Probabilists' Hermite He_n / sqrt(n!)
double hermite_oracle(int n, double x) {
  double h0 = 1.0, h1 = x;
  if (n == 0) return 1.0;
  for (int k = 1; k < n; ++k) {
    const double h2 = x * h1 - k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1 / std::sqrt(std::tgamma(n + 1.0));
}

std::size_t brute_force_count(const std::vector<int>& caps, int total) {
  std::size_t count = 0;
  std::vector<int> d(caps.size(), 0);
  while (true) {
    int s = 0;
    for (int v : d) s += v;
    if (s <= total) ++count;
    std::size_t k = 0;
    while (k < d.size() && d[k] == caps[k]) d[k++] = 0;
    if (k == d.size()) break;
    ++d[k];
  }
  return count;
}

double max_off_identity(const Eigen::MatrixXd& g) {
  return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("multi-index set sizes") {
  CHECK(make_multi_index_set(3, {2, 2, 2}, 2).size() == 10);
  const auto one = make_multi_index_set(1, {2}, 2);
  REQUIRE(one.size() == 3);
  CHECK(one.members[0] == MultiIndex{0});
  CHECK(one.members[1] == MultiIndex{1});
  CHECK(one.members[2] == MultiIndex{2});
  CHECK(make_multi_index_set(2, {5, 3}, 5).size() == 18);
  CHECK(brute_force_count({5, 3}, 5) == 18);
  CHECK_THROWS_AS(make_multi_index_set(0, {}, 2), Error);
}

TEST_CASE("multi-index sets match brute force and the binomial formula") {
  for (std::size_t dims = 1; dims <= 4; ++dims)
    for (int total = 0; total <= 6; ++total) {
      std::vector<int> caps(dims, total);
      const auto set = make_multi_index_set(dims, caps, total);
      CHECK(set.size() == brute_force_count(caps, total));
      // (P + d)! / (P! d!)
      const double binom = std::tgamma(total + dims + 1.0) / (std::tgamma(total + 1.0) * std::tgamma(dims + 1.0));
      CHECK(static_cast<double>(set.size()) == doctest::Approx(binom));
    }
  const std::vector<int> caps{3, 1, 2};
  CHECK(make_multi_index_set(3, caps, 4).size() == brute_force_count(caps, 4));
}

TEST_CASE("multi-index ordering is lexicographic, constant first, and stable") {
  const auto a = make_multi_index_set(3, {3, 2, 4}, 5);
  const auto b = make_multi_index_set(3, {3, 2, 4}, 5);
  CHECK(a.members == b.members);
  CHECK(a.members.front() == MultiIndex{0, 0, 0});
  for (std::size_t k = 1; k < a.size(); ++k) CHECK(a.members[k - 1] < a.members[k]);
  for (const auto& d : a.members) {
    int s = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      CHECK(d[k] <= a.caps[k]);
      s += d[k];
    }
    CHECK(s <= 5);
    CHECK(a.find(d) >= 0);
  }
  CHECK(a.find({9, 0, 0}) == -1);
}

TEST_CASE("basis evaluation examples") {
  const auto s = space_of({Distribution::uniform(), Distribution::gaussian(0.0, 1.0)});
  const OrthoBasis leg(s, {0}, {3}, 3);
  const OrthoBasis her(s, {1}, {3}, 3);
  const double one = 1.0, zero = 0.0;
  CHECK(leg.eval(0, &one) == doctest::Approx(1.0));
  CHECK(leg.eval(1, &one) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  CHECK(her.eval(2, &zero) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(leg.eval(4, &one), Error);
  CHECK(OrthoBasis::constant().size() == 1);
  CHECK(OrthoBasis::null_space().size() == 0);
}

TEST_CASE("univariate polynomials agree with explicit recursions") {
  std::vector<double> p(13);
  for (double x : {-1.0, -0.7, 0.0, 0.3, 0.99}) {
    orthonormal_values(Distribution::Kind::uniform, x, 12, p.data());
    for (int n = 0; n <= 12; ++n) CHECK(p[n] == doctest::Approx(legendre_oracle(n, x)).epsilon(1e-12));
  }
  for (double x : {-3.0, -1.0, 0.0, 0.5, 2.5}) {
    orthonormal_values(Distribution::Kind::gaussian, x, 12, p.data());
    for (int n = 0; n <= 12; ++n) CHECK(p[n] == doctest::Approx(hermite_oracle(n, x)).epsilon(1e-11));
  }
}

TEST_CASE("gaussian parameters are standardized before evaluation") {
  const auto s = space_of({Distribution::gaussian(10.0, 2.0)});
  const OrthoBasis b(s, {0}, {2}, 2);
  const double x = 12.0;  // one standard deviation above the mean
  CHECK(b.eval(1, &x) == doctest::Approx(1.0));
  CHECK(b.eval(2, &x) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(Distribution::gaussian_tolerance(10.0, 0.2).sigma == doctest::Approx(2.0));
  CHECK_THROWS_AS(Distribution::gaussian(1.0, 0.0), Error);
}

TEST_CASE("gram matrices are the identity for dims <= 4 and order <= 6") {
  const std::vector<Distribution> kinds{Distribution::uniform(), Distribution::gaussian(1.0, 0.3)};
  for (std::size_t dims = 1; dims <= 4; ++dims)
    for (int total = 0; total <= 6; total += (dims > 2 ? 3 : 1)) {
      std::vector<Distribution> ds;
      for (std::size_t k = 0; k < dims; ++k) ds.push_back(kinds[k % 2]);
      const auto s = space_of(ds);
      std::vector<std::size_t> subset(dims);
      for (std::size_t k = 0; k < dims; ++k) subset[k] = k;
      const OrthoBasis b(s, subset, std::vector<int>(dims, total), total);
      CHECK(max_off_identity(gram_matrix(b, total + 1)) < 1e-10);
    }
}

TEST_CASE("too few quadrature points leave off-identity entries") {
  const auto s = space_of({Distribution::uniform()});
  const OrthoBasis b(s, {0}, {3}, 3);
  CHECK(max_off_identity(gram_matrix(b, 4)) < 1e-14);
  CHECK(max_off_identity(gram_matrix(b, 3)) > 1e-3);
  const auto g = space_of({Distribution::gaussian(0.0, 1.0)});
  const OrthoBasis h(g, {0}, {4}, 4);
  CHECK(max_off_identity(gram_matrix(h, 4)) > 1e-3);
}

TEST_CASE("projection examples") {
  const auto s = space_of({Distribution::uniform(), Distribution::uniform()});
  const OrthoBasis full(s, {0, 1}, {1, 1}, 2);
  // x = 2 + sqrt(3) xi1 * sqrt(3) xi2 = 2 + psi_(1,1)
  GpcExpansion x{full, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(full.size()), 1)};
  x.coeffs(0, 0) = 2.0;
  x.coeffs(full.index_set().find({1, 1}), 0) = 1.0;
  const OrthoBasis first(s, {0}, {1}, 1);
  const GpcExpansion p = project(x, first);
  CHECK(p.coeffs(0, 0) == doctest::Approx(2.0));
  CHECK(p.coeffs(1, 0) == doctest::Approx(0.0));
  const GpcExpansion q = project_by_quadrature(x, first);
  CHECK(q.coeffs(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(std::abs(q.coeffs(1, 0)) < 1e-13);

  const GpcExpansion same = project(x, full);
  CHECK(same.coeffs == x.coeffs);
  CHECK(project(x, OrthoBasis::null_space()).coeffs.rows() == 0);
  CHECK(project(x, OrthoBasis::constant()).coeffs(0, 0) == 2.0);

  ParameterSpace other = space_of({Distribution::gaussian(0.0, 1.0)});
  const OrthoBasis wrong(other, {0}, {1}, 1);
  CHECK_THROWS_AS(project(x, wrong), Error);
}

TEST_CASE("projection is nested and agrees with the quadrature route") {
  const auto s = space_of({Distribution::uniform(), Distribution::gaussian(2.0, 0.5), Distribution::uniform()});
  const OrthoBasis b2(s, {0, 1, 2}, {3, 2, 3}, 4);
  const OrthoBasis b1(s, {0, 2}, {2, 3}, 3);
  const OrthoBasis b0(s, {2}, {2}, 2);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GpcExpansion x{b2, Eigen::MatrixXd(static_cast<Eigen::Index>(b2.size()), 3)};
  for (Eigen::Index i = 0; i < x.coeffs.size(); ++i) x.coeffs.data()[i] = u(rng);

  const GpcExpansion direct = project(x, b0);
  const GpcExpansion chained = project(project(x, b1), b0);
  CHECK((direct.coeffs - chained.coeffs).cwiseAbs().maxCoeff() < 1e-10);
  const GpcExpansion quad = project_by_quadrature(x, b1);
  CHECK((quad.coeffs - project(x, b1).coeffs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("moments from coefficients") {
  GpcExpansion a{OrthoBasis::constant(), Eigen::MatrixXd::Constant(1, 1, 5.0)};
  CHECK(moments(a).mean[0] == 5.0);
  CHECK(moments(a).var[0] == 0.0);
  const auto s = space_of({Distribution::uniform()});
  GpcExpansion b{OrthoBasis(s, {0}, {1}, 1), Eigen::MatrixXd(2, 1)};
  b.coeffs << 0.0, 2.0;
  CHECK(moments(b).mean[0] == 0.0);
  CHECK(moments(b).var[0] == 4.0);
}

TEST_CASE("modal variance matches sampling of the expansion") {
  const auto s = space_of({Distribution::uniform(), Distribution::gaussian(0.0, 1.0)});
  const OrthoBasis b(s, {0, 1}, {3, 3}, 3);
  GpcExpansion x{b, Eigen::MatrixXd(static_cast<Eigen::Index>(b.size()), 1)};
  for (Eigen::Index i = 0; i < x.coeffs.rows(); ++i) x.coeffs(i, 0) = 1.0 / (1.0 + static_cast<double>(i));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < n; ++k) {
    const double xi[2] = {u(rng), g(rng)};
    double v = 0.0;
    eval_expansion(x, xi, &v);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n, var = sq / n - mean * mean;
  const Moments m = moments(x);
  CHECK(var == doctest::Approx(m.var[0]).epsilon(0.02));
  CHECK(mean == doctest::Approx(m.mean[0]).epsilon(0.02));
}

TEST_CASE("Parseval: second moment from coefficients equals quadrature") {
  const auto s = space_of({Distribution::gaussian(1.0, 0.2), Distribution::uniform()});
  const OrthoBasis b(s, {0, 1}, {4, 4}, 4);
  GpcExpansion x{b, Eigen::MatrixXd(static_cast<Eigen::Index>(b.size()), 1)};
  for (Eigen::Index i = 0; i < x.coeffs.rows(); ++i) x.coeffs(i, 0) = std::sin(1.0 + static_cast<double>(i));
  const CollocationGrid grid = tensor_grid(s, {0, 1}, {5, 5});
  double quad = 0.0;
  std::vector<double> node(2);
  for (std::size_t q = 0; q < grid.size(); ++q) {
    grid.node(q, node.data());
    double v = 0.0;
    eval_expansion(x, node.data(), &v);
    quad += grid.weight(q) * v * v;
  }
  const Moments m = moments(x);
  CHECK(quad == doctest::Approx(m.var[0] + m.mean[0] * m.mean[0]).epsilon(1e-8));
}
