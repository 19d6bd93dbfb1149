#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace pwr {

// Covariance kernels on normalized time [0,1].
struct CovarianceKernel {
  enum class Kind { exponential, occupancy, grid };

  Kind kind = Kind::exponential;
  double sigma = 0.1;
  double tc = 0.1;  // exponential correlation time
  double a = 20.0;  // occupancy slope
  double t1 = 0.3;
  double t2 = 0.3;
  Eigen::MatrixXd values;  // grid kind: R on a uniform grid over [0,1]^2

  static CovarianceKernel exponential(double sigma, double tc);
  static CovarianceKernel occupancy(double sigma, double a, double t1, double t2);
  static CovarianceKernel from_grid(const Eigen::MatrixXd& values);

  double operator()(double t, double s) const;
  double std_dev(double t) const;
  double correlation_time(double t, double s) const;
};

struct KLModel {
  double mean = 0.0;
  std::size_t basis_order = 0;  // M
  Eigen::VectorXd lambda;       // descending
  Eigen::MatrixXd modes;        // M x N Legendre coefficients

  std::size_t truncation() const { return static_cast<std::size_t>(lambda.size()); }
  double mode(std::size_t n, double t) const;
};

// Orthonormal shifted Legendre values q_0..q_{m-1} on [0,1].
void shifted_legendre(double t, std::size_t m, double* out);

KLModel kl_solve(const CovarianceKernel& kernel, std::size_t m, std::size_t n, double mean = 0.0);

// Integral of R(t,t) over [0,1].
double kernel_trace(const CovarianceKernel& kernel);

double variance_captured(const KLModel& model, const CovarianceKernel& kernel);

std::vector<double> kl_sample(const KLModel& model, const std::vector<double>& draws,
                              const std::vector<double>& times);

// sum_n lambda_n phi_n(t) phi_n(s) on a set of times
Eigen::MatrixXd truncated_kernel(const KLModel& model, const std::vector<double>& times, std::size_t n);

}  // namespace pwr
