#include "pwr/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pwr/error.hpp"
#include "pwr/linalg.hpp"

namespace pwr {

QuadratureRule1D gauss_rule(const Distribution& dist, int m) {
  if (m < 1) throw Error(ErrorKind::invalid_argument, "gauss_rule needs m >= 1");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
  for (int n = 1; n < m; ++n) {
    const double b = recurrence_offdiag(dist.kind, n);
    jac(n - 1, n) = b;
    jac(n, n - 1) = b;
  }
  const SymEigen eig = jacobi_eigen(jac, 1e-14, 100);

  std::vector<double> z(static_cast<std::size_t>(m)), w(static_cast<std::size_t>(m));
  double total = 0.0;
  for (int k = 0; k < m; ++k) {
    z[k] = eig.values[k];
    w[k] = eig.vectors(0, k) * eig.vectors(0, k);
    total += w[k];
  }
  // both families are symmetric about zero; enforce it exactly
  for (int k = 0; k < m / 2; ++k) {
    const int j = m - 1 - k;
    const double node = 0.5 * (z[j] - z[k]);
    const double weight = 0.5 * (w[j] + w[k]);
    z[k] = -node;
    z[j] = node;
    w[k] = weight;
    w[j] = weight;
  }
  if (m % 2 == 1) z[m / 2] = 0.0;

  QuadratureRule1D rule;
  rule.dist = dist;
  rule.nodes.resize(static_cast<std::size_t>(m));
  rule.weights.resize(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    rule.nodes[k] = dist.from_standard(z[k]);
    rule.weights[k] = w[k] / total;
  }
  return rule;
}

CollocationGrid::CollocationGrid(std::vector<std::size_t> subset, std::vector<QuadratureRule1D> rules)
    : subset_(std::move(subset)), rules_(std::move(rules)) {
  if (subset_.size() != rules_.size()) throw Error(ErrorKind::length_mismatch, "one rule per grid dimension required");
  count_ = 1;
  for (const auto& r : rules_) count_ *= r.level();
}

std::string CollocationGrid::count_string() const { return count_.str(); }

double CollocationGrid::count_double() const { return count_.convert_to<double>(); }

std::size_t CollocationGrid::size(double q_max) const {
  if (count_ > BigInt(static_cast<long long>(q_max))) {
    std::ostringstream os;
    os.precision(4);
    os << "collocation grid has Q=" << count_.str() << " (" << std::scientific << count_double()
       << ") nodes, above the limit " << q_max;
    throw Error(ErrorKind::grid_too_large, os.str());
  }
  return count_.convert_to<std::size_t>();
}

void CollocationGrid::node(std::size_t q, double* xi) const {
  for (std::size_t k = rules_.size(); k > 0; --k) {
    const auto& r = rules_[k - 1];
    const std::size_t m = r.nodes.size();
    xi[k - 1] = r.nodes[q % m];
    q /= m;
  }
}

double CollocationGrid::weight(std::size_t q) const {
  double w = 1.0;
  for (std::size_t k = rules_.size(); k > 0; --k) {
    const auto& r = rules_[k - 1];
    const std::size_t m = r.weights.size();
    w *= r.weights[q % m];
    q /= m;
  }
  return w;
}

Eigen::MatrixXd CollocationGrid::nodes(double q_max) const {
  const std::size_t q_count = size(q_max);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(q_count), static_cast<Eigen::Index>(dims()));
  std::vector<double> xi(dims());
  for (std::size_t q = 0; q < q_count; ++q) {
    node(q, xi.data());
    for (std::size_t k = 0; k < dims(); ++k) out(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(k)) = xi[k];
  }
  return out;
}

Eigen::VectorXd CollocationGrid::weights(double q_max) const {
  const std::size_t q_count = size(q_max);
  Eigen::VectorXd out(static_cast<Eigen::Index>(q_count));
  for (std::size_t q = 0; q < q_count; ++q) out[static_cast<Eigen::Index>(q)] = weight(q);
  return out;
}

CollocationGrid tensor_grid(const std::vector<std::size_t>& subset, const std::vector<Distribution>& dists,
                            const std::vector<int>& levels) {
  if (levels.size() != subset.size() || dists.size() != subset.size())
    throw Error(ErrorKind::length_mismatch, "one level per grid dimension required");
  std::vector<QuadratureRule1D> rules;
  rules.reserve(subset.size());
  for (std::size_t k = 0; k < subset.size(); ++k) rules.push_back(gauss_rule(dists[k], levels[k]));
  return CollocationGrid(subset, std::move(rules));
}

CollocationGrid tensor_grid(const ParameterSpace& space, const std::vector<std::size_t>& subset,
                            const std::vector<int>& levels) {
  std::vector<Distribution> dists;
  for (std::size_t p : subset) {
    if (p >= space.size()) throw Error(ErrorKind::index_out_of_range, "grid parameter out of range");
    dists.push_back(space.params[p]);
  }
  return tensor_grid(subset, dists, levels);
}

Eigen::MatrixXd weighted_basis_matrix(const OrthoBasis& basis, const CollocationGrid& grid, ExecPolicy policy) {
  const std::size_t q_count = grid.size();
  std::vector<std::size_t> pos(basis.dims());
  for (std::size_t k = 0; k < basis.dims(); ++k) {
    auto it = std::find(grid.subset().begin(), grid.subset().end(), basis.subset()[k]);
    if (it == grid.subset().end())
      throw Error(ErrorKind::invalid_argument, "basis parameter missing from collocation grid");
    pos[k] = static_cast<std::size_t>(it - grid.subset().begin());
    if (!(grid.rules()[pos[k]].dist == basis.dists()[k]))
      throw Error(ErrorKind::distribution_mismatch, "grid and basis disagree on a parameter law");
  }
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(q_count));
  for_each_index(policy, q_count, [&](std::size_t q) {
    std::vector<double> node(grid.dims()), local(basis.dims());
    grid.node(q, node.data());
    for (std::size_t k = 0; k < local.size(); ++k) local[k] = node[pos[k]];
    auto col = phi.col(static_cast<Eigen::Index>(q));
    basis.eval_all(local.data(), col.data());
    col *= grid.weight(q);
  });
  return phi;
}

GpcExpansion pseudo_spectral_coeffs(const Eigen::MatrixXd& samples, const CollocationGrid& grid,
                                    const OrthoBasis& basis, ExecPolicy policy) {
  if (static_cast<std::size_t>(samples.rows()) != grid.size())
    throw Error(ErrorKind::length_mismatch, "sample count does not match grid size");
  const Eigen::MatrixXd phi = weighted_basis_matrix(basis, grid, policy);
  GpcExpansion out{basis, Eigen::MatrixXd(phi.rows(), samples.cols())};
  for_each_index(policy, static_cast<std::size_t>(samples.cols()), [&](std::size_t k) {
    out.coeffs.col(static_cast<Eigen::Index>(k)).noalias() = phi * samples.col(static_cast<Eigen::Index>(k));
  });
  return out;
}

}  // namespace pwr
