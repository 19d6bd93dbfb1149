#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pwr {

// Uniform is fixed to [-1,1]; Gaussian is used unmapped on the real line.
struct Distribution {
  enum class Kind { uniform, gaussian };

  Kind kind = Kind::uniform;
  double mu = 0.0;
  double sigma = 1.0;

  static Distribution uniform();
  static Distribution gaussian(double mean, double std_dev);
  // sigma = tol * mean
  static Distribution gaussian_tolerance(double mean, double tol);

  double standardize(double x) const;
  double from_standard(double z) const;
  double mean() const;
  double variance() const;

  bool operator==(const Distribution& other) const = default;
};

std::string describe(const Distribution& d);

// Orthonormal polynomial values p_0..p_order at standardized coordinate z.
void orthonormal_values(Distribution::Kind kind, double z, int order, double* out);

// Off-diagonal Jacobi-matrix entry b_n (n >= 1) of the orthonormal recurrence.
double recurrence_offdiag(Distribution::Kind kind, int n);

struct ParameterSpace {
  std::vector<Distribution> params;
  std::vector<std::string> names;
  // owner[state] = parameter indices housed by that state
  std::vector<std::vector<std::size_t>> owner;

  std::size_t size() const { return params.size(); }
  std::size_t add(const Distribution& d, const std::string& name);
  std::vector<double> means() const;
  void validate(std::size_t n_states) const;
};

}  // namespace pwr
