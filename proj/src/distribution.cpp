#include "pwr/distribution.hpp"

#include <cmath>
#include <sstream>

#include "pwr/error.hpp"

namespace pwr {

Distribution Distribution::uniform() { return Distribution{Kind::uniform, 0.0, 1.0}; }

Distribution Distribution::gaussian(double mean, double std_dev) {
  if (!(std_dev > 0.0) || !std::isfinite(std_dev) || !std::isfinite(mean))
    throw Error(ErrorKind::invalid_argument, "gaussian distribution needs finite mean and sigma > 0");
  return Distribution{Kind::gaussian, mean, std_dev};
}

Distribution Distribution::gaussian_tolerance(double mean, double tol) {
  return gaussian(mean, tol * std::abs(mean));
}

double Distribution::standardize(double x) const {
  return kind == Kind::gaussian ? (x - mu) / sigma : x;
}

double Distribution::from_standard(double z) const {
  return kind == Kind::gaussian ? mu + sigma * z : z;
}

double Distribution::mean() const { return kind == Kind::gaussian ? mu : 0.0; }

double Distribution::variance() const {
  return kind == Kind::gaussian ? sigma * sigma : 1.0 / 3.0;
}

std::string describe(const Distribution& d) {
  std::ostringstream os;
  os.precision(17);
  if (d.kind == Distribution::Kind::uniform)
    os << "uniform[-1,1]";
  else
    os << "gaussian(" << d.mu << "," << d.sigma << ")";
  return os.str();
}

double recurrence_offdiag(Distribution::Kind kind, int n) {
  const double dn = n;
  if (kind == Distribution::Kind::uniform) return dn / std::sqrt(4.0 * dn * dn - 1.0);
  return std::sqrt(dn);
}

void orthonormal_values(Distribution::Kind kind, double z, int order, double* out) {
  if (order < 0) return;
  out[0] = 1.0;
  if (order == 0) return;
  out[1] = z / recurrence_offdiag(kind, 1);
  for (int n = 1; n < order; ++n)
    out[n + 1] = (z * out[n] - recurrence_offdiag(kind, n) * out[n - 1]) / recurrence_offdiag(kind, n + 1);
}

std::size_t ParameterSpace::add(const Distribution& d, const std::string& name) {
  params.push_back(d);
  names.push_back(name);
  return params.size() - 1;
}

std::vector<double> ParameterSpace::means() const {
  std::vector<double> m(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) m[k] = params[k].mean();
  return m;
}

void ParameterSpace::validate(std::size_t n_states) const {
  if (owner.size() != n_states)
    throw Error(ErrorKind::invalid_argument, "parameter owner map must list every state");
  std::vector<bool> owned(params.size(), false);
  for (const auto& list : owner)
    for (std::size_t k : list) {
      if (k >= params.size()) throw Error(ErrorKind::index_out_of_range, "owner references unknown parameter");
      owned[k] = true;
    }
  for (std::size_t k = 0; k < owned.size(); ++k)
    if (!owned[k])
      throw Error(ErrorKind::invalid_argument, "parameter " + std::to_string(k) + " is not owned by any state");
}

}  // namespace pwr
