#include "pwr/kl.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "pwr/distribution.hpp"
#include "pwr/error.hpp"
#include "pwr/linalg.hpp"
#include "pwr/quadrature.hpp"

namespace pwr {

namespace {

struct Rule {
  std::vector<double> t, w;
};

// Composite Gauss-Legendre on [0,1].
Rule composite_rule(std::size_t panels, int points) {
  const QuadratureRule1D base = gauss_rule(Distribution::uniform(), points);
  Rule r;
  const double width = 1.0 / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p)
    for (int k = 0; k < points; ++k) {
      r.t.push_back(width * (static_cast<double>(p) + 0.5 * (base.nodes[k] + 1.0)));
      r.w.push_back(width * base.weights[k]);
    }
  return r;
}

Rule kernel_rule(std::size_t m) { return composite_rule(std::max<std::size_t>(32, 2 * m), 8); }

}  // namespace

CovarianceKernel CovarianceKernel::exponential(double sigma, double tc) {
  CovarianceKernel k;
  k.kind = Kind::exponential;
  k.sigma = sigma;
  k.tc = tc;
  return k;
}

CovarianceKernel CovarianceKernel::occupancy(double sigma, double a, double t1, double t2) {
  CovarianceKernel k;
  k.kind = Kind::occupancy;
  k.sigma = sigma;
  k.a = a;
  k.t1 = t1;
  k.t2 = t2;
  return k;
}

CovarianceKernel CovarianceKernel::from_grid(const Eigen::MatrixXd& values) {
  if (values.rows() < 2 || values.rows() != values.cols())
    throw Error(ErrorKind::invalid_argument, "grid kernel needs a square matrix with at least 2 points");
  if ((values - values.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, values.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::invalid_argument, "grid kernel must be symmetric");
  CovarianceKernel k;
  k.kind = Kind::grid;
  k.values = values;
  return k;
}

double CovarianceKernel::std_dev(double t) const {
  switch (kind) {
    case Kind::exponential: return sigma;
    case Kind::occupancy: return sigma * (std::tanh(a * (t - t1)) - std::tanh(a * (t - t2))) / 2.0;
    case Kind::grid: return std::sqrt(std::max((*this)(t, t), 0.0));
  }
  return 0.0;
}

double CovarianceKernel::correlation_time(double t, double s) const {
  if (kind == Kind::exponential) return tc;
  return (1.0 - std::tanh(a * (t - t1))) * (1.0 - std::tanh(a * (s - t1))) / 4.0 +
         (1.0 + std::tanh(a * (t - t2))) * (1.0 + std::tanh(a * (s - t2))) / 4.0;
}

double CovarianceKernel::operator()(double t, double s) const {
  if (kind == Kind::grid) {
    const auto g = values.rows();
    const double scale = static_cast<double>(g - 1);
    auto locate = [&](double x, Eigen::Index& i, double& f) {
      const double pos = std::clamp(x, 0.0, 1.0) * scale;
      i = std::min<Eigen::Index>(static_cast<Eigen::Index>(pos), g - 2);
      f = pos - static_cast<double>(i);
    };
    Eigen::Index i, j;
    double fi, fj;
    locate(t, i, fi);
    locate(s, j, fj);
    return (1 - fi) * (1 - fj) * values(i, j) + fi * (1 - fj) * values(i + 1, j) + (1 - fi) * fj * values(i, j + 1) +
           fi * fj * values(i + 1, j + 1);
  }
  const double lag = std::abs(t - s);
  const double tcv = correlation_time(t, s);
  double rho;
  if (tcv < 1e-12)
    rho = lag > 0.0 ? 0.0 : 1.0;
  else
    rho = std::exp(-lag / tcv);
  return rho * std_dev(t) * std_dev(s);
}

void shifted_legendre(double t, std::size_t m, double* out) {
  if (m == 0) return;
  orthonormal_values(Distribution::Kind::uniform, 2.0 * t - 1.0, static_cast<int>(m) - 1, out);
}

double KLModel::mode(std::size_t n, double t) const {
  std::vector<double> q(basis_order);
  shifted_legendre(t, basis_order, q.data());
  double v = 0.0;
  for (std::size_t k = 0; k < basis_order; ++k) v += modes(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) * q[k];
  return v;
}

KLModel kl_solve(const CovarianceKernel& kernel, std::size_t m, std::size_t n, double mean) {
  if (m == 0) throw Error(ErrorKind::invalid_argument, "KL basis order must be positive");
  if (n > m) throw Error(ErrorKind::invalid_argument, "KL truncation exceeds basis order");
  const Rule rule = kernel_rule(m);
  const std::size_t q = rule.t.size();
  const auto mm = static_cast<Eigen::Index>(m);

  // B(k, j) = w_j q_k(t_j); G = B R B^T
  Eigen::MatrixXd b(mm, static_cast<Eigen::Index>(q));
  std::vector<double> vals(m);
  for (std::size_t j = 0; j < q; ++j) {
    shifted_legendre(rule.t[j], m, vals.data());
    for (std::size_t k = 0; k < m; ++k) b(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = rule.w[j] * vals[k];
  }
  Eigen::MatrixXd r(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = kernel(rule.t[i], rule.t[j]);
      r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  const Eigen::MatrixXd g = b * r * b.transpose();
  const SymEigen eig = jacobi_eigen(g, 1e-14, 100);

  const double top = eig.values[mm - 1];
  const double bottom = eig.values[0];
  if (top > 0 && bottom < -1e-8 * top)
    throw Error(ErrorKind::indefinite_kernel, "kernel discretization is indefinite beyond tolerance");

  KLModel model;
  model.mean = mean;
  model.basis_order = m;
  model.lambda.resize(static_cast<Eigen::Index>(n));
  model.modes.resize(mm, static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Index src = mm - 1 - static_cast<Eigen::Index>(k);
    double lam = eig.values[src];
    if (lam < 0) {
      if (lam < -1e-10 * std::max(top, 0.0))
        std::cerr << "warning: clamping KL eigenvalue " << lam << " to zero\n";
      lam = 0.0;
    }
    Eigen::VectorXd v = eig.vectors.col(src);
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    model.lambda[static_cast<Eigen::Index>(k)] = lam;
    model.modes.col(static_cast<Eigen::Index>(k)) = v;
  }
  return model;
}

double kernel_trace(const CovarianceKernel& kernel) {
  const Rule rule = composite_rule(64, 8);
  double sum = 0.0;
  for (std::size_t j = 0; j < rule.t.size(); ++j) sum += rule.w[j] * kernel(rule.t[j], rule.t[j]);
  return sum;
}

double variance_captured(const KLModel& model, const CovarianceKernel& kernel) {
  const double trace = kernel_trace(kernel);
  if (!(trace > 1e-300)) throw Error(ErrorKind::zero_trace, "kernel has zero total variance");
  return std::clamp(model.lambda.sum() / trace, 0.0, 1.0);
}

std::vector<double> kl_sample(const KLModel& model, const std::vector<double>& draws,
                              const std::vector<double>& times) {
  if (draws.size() != model.truncation())
    throw Error(ErrorKind::length_mismatch, "KL sample needs one draw per retained mode");
  std::vector<double> path(times.size(), model.mean);
  std::vector<double> q(model.basis_order);
  for (std::size_t i = 0; i < times.size(); ++i) {
    shifted_legendre(times[i], model.basis_order, q.data());
    for (std::size_t nidx = 0; nidx < draws.size(); ++nidx) {
      double phi = 0.0;
      for (std::size_t k = 0; k < model.basis_order; ++k)
        phi += model.modes(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(nidx)) * q[k];
      path[i] += std::sqrt(model.lambda[static_cast<Eigen::Index>(nidx)]) * draws[nidx] * phi;
    }
  }
  return path;
}

Eigen::MatrixXd truncated_kernel(const KLModel& model, const std::vector<double>& times, std::size_t n) {
  n = std::min(n, model.truncation());
  const auto tt = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd phi(tt, static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < tt; ++i)
    for (std::size_t k = 0; k < n; ++k) phi(i, static_cast<Eigen::Index>(k)) = model.mode(k, times[static_cast<std::size_t>(i)]);
  return phi * model.lambda.head(static_cast<Eigen::Index>(n)).asDiagonal() * phi.transpose();
}

}  // namespace pwr
