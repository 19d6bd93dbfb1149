#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "pwr/distribution.hpp"
#include "pwr/exec.hpp"
#include "pwr/ortho_basis.hpp"

namespace pwr {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr double kDefaultQmax = 1e7;

struct QuadratureRule1D {
  Distribution dist;
  std::vector<double> nodes;    // physical coordinates, ascending
  std::vector<double> weights;  // sum to 1
  int level() const { return static_cast<int>(nodes.size()); }
};

QuadratureRule1D gauss_rule(const Distribution& dist, int m);

// Tensor product of 1D rules. Nodes are produced on demand from their index
// (last dimension varies fastest), so only the count is computed up front.
class CollocationGrid {
 public:
  CollocationGrid() = default;
  CollocationGrid(std::vector<std::size_t> subset, std::vector<QuadratureRule1D> rules);

  const std::vector<std::size_t>& subset() const { return subset_; }
  const std::vector<QuadratureRule1D>& rules() const { return rules_; }
  std::size_t dims() const { return subset_.size(); }
  const BigInt& count() const { return count_; }
  std::string count_string() const;
  double count_double() const;

  // Q as a machine integer; refuses when Q exceeds q_max.
  std::size_t size(double q_max = kDefaultQmax) const;

  void node(std::size_t q, double* xi) const;
  double weight(std::size_t q) const;

  // Q x dims node matrix and weight vector; refuses above q_max.
  Eigen::MatrixXd nodes(double q_max = kDefaultQmax) const;
  Eigen::VectorXd weights(double q_max = kDefaultQmax) const;

 private:
  std::vector<std::size_t> subset_;
  std::vector<QuadratureRule1D> rules_;
  BigInt count_ = 1;
};

CollocationGrid tensor_grid(const ParameterSpace& space, const std::vector<std::size_t>& subset,
                            const std::vector<int>& levels);
CollocationGrid tensor_grid(const std::vector<std::size_t>& subset, const std::vector<Distribution>& dists,
                            const std::vector<int>& levels);

// Psi(j, q) * w_q for every basis function j and grid node q. The grid subset
// must contain the basis subset.
Eigen::MatrixXd weighted_basis_matrix(const OrthoBasis& basis, const CollocationGrid& grid,
                                      ExecPolicy policy = ExecPolicy::serial);

// a_jk = sum_q w_q Psi_j(r_q) S(q, k)
GpcExpansion pseudo_spectral_coeffs(const Eigen::MatrixXd& samples, const CollocationGrid& grid,
                                    const OrthoBasis& basis, ExecPolicy policy = ExecPolicy::serial);

}  // namespace pwr
