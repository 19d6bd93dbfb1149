#include "pwr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "pwr/error.hpp"

namespace pwr {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::index_out_of_range: return "index-out-of-range";
    case ErrorKind::distribution_mismatch: return "distribution-mismatch";
    case ErrorKind::length_mismatch: return "length-mismatch";
    case ErrorKind::grid_too_large: return "grid-too-large";
    case ErrorKind::integration_diverged: return "integration-diverged";
    case ErrorKind::singular_jacobian: return "singular-jacobian";
    case ErrorKind::no_convergence: return "no-convergence";
    case ErrorKind::isolated_node: return "isolated-node";
    case ErrorKind::instability: return "instability";
    case ErrorKind::unresolved_peaks: return "unresolved-peaks";
    case ErrorKind::indefinite_kernel: return "indefinite-kernel";
    case ErrorKind::zero_trace: return "zero-trace";
    case ErrorKind::invalid_topology: return "invalid-topology";
    case ErrorKind::dimension_too_large: return "dimension-too-large";
    case ErrorKind::config_error: return "config-error";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::integration_diverged:
    case ErrorKind::singular_jacobian:
    case ErrorKind::no_convergence:
    case ErrorKind::instability:
    case ErrorKind::unresolved_peaks:
    case ErrorKind::indefinite_kernel:
    case ErrorKind::zero_trace:
    case ErrorKind::grid_too_large:
      return true;
    default:
      return false;
  }
}

SymEigen jacobi_eigen(const Eigen::MatrixXd& input, double tol, int max_sweeps) {
  const Eigen::Index n = input.rows();
  if (input.cols() != n) throw Error(ErrorKind::invalid_argument, "jacobi_eigen: matrix not square");
  Eigen::MatrixXd a = 0.5 * (input + input.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(a.norm(), 1e-300);

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= tol * scale) break;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  SymEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweep;
  return out;
}

double inf_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace pwr
