#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pwr/distribution.hpp"
#include "pwr/multi_index.hpp"

namespace pwr {

// Multivariate orthonormal polynomial space over a parameter subset.
// An empty subset gives the constant space (size 1); null_space() is W^∅ (size 0).
class OrthoBasis {
 public:
  OrthoBasis() = default;
  OrthoBasis(const ParameterSpace& space, std::vector<std::size_t> subset, std::vector<int> caps, int total);

  static OrthoBasis constant();
  static OrthoBasis null_space();

  const std::vector<std::size_t>& subset() const { return subset_; }
  const std::vector<Distribution>& dists() const { return dists_; }
  const MultiIndexSet& index_set() const { return index_set_; }
  const std::vector<MultiIndex>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  std::size_t dims() const { return subset_.size(); }
  bool is_null() const { return null_; }
  int max_degree() const;

  // xi holds physical parameter values in subset order
  double eval(std::size_t i, const double* xi) const;
  void eval_all(const double* xi, double* out) const;

  // position of a parameter inside the subset, or -1
  std::ptrdiff_t position(std::size_t param) const;

 private:
  std::vector<std::size_t> subset_;
  std::vector<Distribution> dists_;
  std::vector<int> caps_;
  MultiIndexSet index_set_;
  std::vector<MultiIndex> members_;
  bool null_ = false;
};

struct GpcExpansion {
  OrthoBasis basis;
  Eigen::MatrixXd coeffs;  // basis.size() x n_states
};

struct Moments {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

Moments moments(const GpcExpansion& x);

// For each target basis function, the source basis function carrying the same
// polynomial, or -1 when the inner product vanishes.
std::vector<std::ptrdiff_t> projection_map(const OrthoBasis& source, const OrthoBasis& target);

// Orthogonal projection onto the target space via index matching.
GpcExpansion project(const GpcExpansion& x, const OrthoBasis& target);

// Same projection evaluated by tensor quadrature over the union of both subsets.
GpcExpansion project_by_quadrature(const GpcExpansion& x, const OrthoBasis& target);

// Gram matrix by tensor Gauss quadrature with `points` nodes per dimension.
Eigen::MatrixXd gram_matrix(const OrthoBasis& basis, int points);

// Evaluate an expansion at a full parameter vector (indexed by global parameter id).
void eval_expansion(const GpcExpansion& x, const double* xi_global, double* out_states);

}  // namespace pwr
