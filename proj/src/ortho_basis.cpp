#include "pwr/ortho_basis.hpp"

#include <algorithm>
#include <map>

#include "pwr/error.hpp"
#include "pwr/quadrature.hpp"

namespace pwr {

OrthoBasis::OrthoBasis(const ParameterSpace& space, std::vector<std::size_t> subset, std::vector<int> caps,
                       int total)
    : subset_(std::move(subset)), caps_(std::move(caps)) {
  if (caps_.size() != subset_.size()) throw Error(ErrorKind::length_mismatch, "one order cap per parameter required");
  for (std::size_t k = 0; k < subset_.size(); ++k) {
    if (subset_[k] >= space.size()) throw Error(ErrorKind::index_out_of_range, "basis parameter out of range");
    if (k > 0 && subset_[k] <= subset_[k - 1])
      throw Error(ErrorKind::invalid_argument, "basis subset must be strictly increasing");
    dists_.push_back(space.params[subset_[k]]);
  }
  if (subset_.empty()) {
    members_.push_back({});
    return;
  }
  index_set_ = make_multi_index_set(subset_.size(), caps_, total);
  members_ = index_set_.members;
}

OrthoBasis OrthoBasis::constant() {
  OrthoBasis b;
  b.members_.push_back({});
  return b;
}

OrthoBasis OrthoBasis::null_space() {
  OrthoBasis b;
  b.null_ = true;
  return b;
}

int OrthoBasis::max_degree() const {
  int best = 0;
  for (const auto& d : members_) {
    int s = 0;
    for (int v : d) s += v;
    best = std::max(best, s);
  }
  return best;
}

std::ptrdiff_t OrthoBasis::position(std::size_t param) const {
  auto it = std::lower_bound(subset_.begin(), subset_.end(), param);
  if (it == subset_.end() || *it != param) return -1;
  return it - subset_.begin();
}

double OrthoBasis::eval(std::size_t i, const double* xi) const {
  if (i >= members_.size()) throw Error(ErrorKind::index_out_of_range, "basis index out of range");
  const MultiIndex& d = members_[i];
  double v = 1.0;
  std::vector<double> p;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (d[k] == 0) continue;
    p.resize(static_cast<std::size_t>(d[k]) + 1);
    orthonormal_values(dists_[k].kind, dists_[k].standardize(xi[k]), d[k], p.data());
    v *= p[static_cast<std::size_t>(d[k])];
  }
  return v;
}

void OrthoBasis::eval_all(const double* xi, double* out) const {
  const std::size_t dims = subset_.size();
  int width = 1;
  for (int c : caps_) width = std::max(width, c + 1);
  std::vector<double> table(dims * static_cast<std::size_t>(width));
  for (std::size_t k = 0; k < dims; ++k)
    orthonormal_values(dists_[k].kind, dists_[k].standardize(xi[k]), caps_[k], &table[k * width]);
  for (std::size_t i = 0; i < members_.size(); ++i) {
    double v = 1.0;
    for (std::size_t k = 0; k < dims; ++k) v *= table[k * width + members_[i][k]];
    out[i] = v;
  }
}

Moments moments(const GpcExpansion& x) {
  const Eigen::Index n = x.coeffs.cols();
  Moments m;
  m.mean = Eigen::VectorXd::Zero(n);
  m.var = Eigen::VectorXd::Zero(n);
  if (x.coeffs.rows() == 0) return m;
  m.mean = x.coeffs.row(0).transpose();
  for (Eigen::Index j = 1; j < x.coeffs.rows(); ++j) m.var += x.coeffs.row(j).transpose().cwiseAbs2();
  return m;
}

std::vector<std::ptrdiff_t> projection_map(const OrthoBasis& source, const OrthoBasis& target) {
  std::vector<std::ptrdiff_t> map(target.size(), -1);
  if (source.is_null() || target.is_null()) return map;

  // shared parameters must carry the same law
  for (std::size_t k = 0; k < target.dims(); ++k) {
    const std::ptrdiff_t s = source.position(target.subset()[k]);
    if (s >= 0 && !(source.dists()[static_cast<std::size_t>(s)] == target.dists()[k]))
      throw Error(ErrorKind::distribution_mismatch,
                  "parameter " + std::to_string(target.subset()[k]) + " has different distributions");
  }

  std::map<MultiIndex, std::size_t> lookup;
  for (std::size_t i = 0; i < source.size(); ++i) lookup.emplace(source.members()[i], i);

  for (std::size_t t = 0; t < target.size(); ++t) {
    const MultiIndex& d = target.members()[t];
    MultiIndex s(source.dims(), 0);
    bool ok = true;
    for (std::size_t k = 0; k < target.dims(); ++k) {
      const std::ptrdiff_t pos = source.position(target.subset()[k]);
      if (pos < 0) {
        if (d[k] != 0) ok = false;
      } else {
        s[static_cast<std::size_t>(pos)] = d[k];
      }
    }
    if (!ok) continue;
    auto it = lookup.find(s);
    if (it != lookup.end()) map[t] = static_cast<std::ptrdiff_t>(it->second);
  }
  return map;
}

GpcExpansion project(const GpcExpansion& x, const OrthoBasis& target) {
  GpcExpansion out{target, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(target.size()), x.coeffs.cols())};
  const auto map = projection_map(x.basis, target);
  for (std::size_t t = 0; t < map.size(); ++t)
    if (map[t] >= 0) out.coeffs.row(static_cast<Eigen::Index>(t)) = x.coeffs.row(map[t]);
  return out;
}

GpcExpansion project_by_quadrature(const GpcExpansion& x, const OrthoBasis& target) {
  if (target.is_null() || x.basis.is_null())
    return GpcExpansion{target, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(target.size()), x.coeffs.cols())};
  projection_map(x.basis, target);  // distribution check

  std::vector<std::size_t> uni;
  std::vector<Distribution> dists;
  std::vector<int> levels;
  auto degree_in = [](const OrthoBasis& b, std::size_t k) {
    int d = 0;
    for (const auto& m : b.members()) d = std::max(d, m[k]);
    return d;
  };
  std::map<std::size_t, std::pair<Distribution, int>> dims;
  for (std::size_t k = 0; k < x.basis.dims(); ++k)
    dims[x.basis.subset()[k]] = {x.basis.dists()[k], degree_in(x.basis, k)};
  for (std::size_t k = 0; k < target.dims(); ++k) {
    auto it = dims.find(target.subset()[k]);
    const int d = degree_in(target, k);
    if (it == dims.end())
      dims[target.subset()[k]] = {target.dists()[k], d};
    else
      it->second.second += d;
  }
  for (auto& [p, info] : dims) {
    uni.push_back(p);
    dists.push_back(info.first);
    levels.push_back(info.second / 2 + 2);
  }
  const CollocationGrid grid = tensor_grid(uni, dists, levels);
  const std::size_t q_count = grid.size();

  std::vector<std::ptrdiff_t> src_pos(x.basis.dims()), tgt_pos(target.dims());
  for (std::size_t k = 0; k < x.basis.dims(); ++k)
    src_pos[k] = std::lower_bound(uni.begin(), uni.end(), x.basis.subset()[k]) - uni.begin();
  for (std::size_t k = 0; k < target.dims(); ++k)
    tgt_pos[k] = std::lower_bound(uni.begin(), uni.end(), target.subset()[k]) - uni.begin();

  GpcExpansion out{target, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(target.size()), x.coeffs.cols())};
  std::vector<double> node(uni.size()), xs(x.basis.dims()), xt(target.dims());
  Eigen::VectorXd ps(static_cast<Eigen::Index>(x.basis.size())), pt(static_cast<Eigen::Index>(target.size()));
  for (std::size_t q = 0; q < q_count; ++q) {
    grid.node(q, node.data());
    for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = node[static_cast<std::size_t>(src_pos[k])];
    for (std::size_t k = 0; k < xt.size(); ++k) xt[k] = node[static_cast<std::size_t>(tgt_pos[k])];
    x.basis.eval_all(xs.data(), ps.data());
    target.eval_all(xt.data(), pt.data());
    const Eigen::RowVectorXd value = ps.transpose() * x.coeffs;
    out.coeffs.noalias() += grid.weight(q) * pt * value;
  }
  return out;
}

Eigen::MatrixXd gram_matrix(const OrthoBasis& basis, int points) {
  std::vector<int> levels(basis.dims(), points);
  const CollocationGrid grid = tensor_grid(basis.subset(), basis.dists(), levels);
  const Eigen::MatrixXd phi = weighted_basis_matrix(basis, grid);
  const std::size_t q_count = grid.size();
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(q_count));
  std::vector<double> node(basis.dims());
  for (std::size_t q = 0; q < q_count; ++q) {
    grid.node(q, node.data());
    basis.eval_all(node.data(), raw.col(static_cast<Eigen::Index>(q)).data());
  }
  return phi * raw.transpose();
}

void eval_expansion(const GpcExpansion& x, const double* xi_global, double* out_states) {
  const Eigen::Index n = x.coeffs.cols();
  if (x.basis.is_null()) {
    for (Eigen::Index k = 0; k < n; ++k) out_states[k] = 0.0;
    return;
  }
  std::vector<double> local(x.basis.dims());
  for (std::size_t k = 0; k < local.size(); ++k) local[k] = xi_global[x.basis.subset()[k]];
  Eigen::VectorXd psi(static_cast<Eigen::Index>(x.basis.size()));
  x.basis.eval_all(local.data(), psi.data());
  Eigen::Map<Eigen::VectorXd>(out_states, n) = x.coeffs.transpose() * psi;
}

}  // namespace pwr
