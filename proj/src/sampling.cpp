#include "pwr/sampling.hpp"

#include <cmath>

#include "pwr/error.hpp"

namespace pwr {

namespace {
constexpr int kSobolBits = 52;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t state = master ^ (stream * 0xD1B54A32D192ED03ULL);
  splitmix64(state);
  return splitmix64(state);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::invalid_argument, "normal_quantile needs 0 < p < 1");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double from_uniform(const Distribution& d, double u) {
  if (d.kind == Distribution::Kind::uniform) return 2.0 * u - 1.0;
  return d.from_standard(normal_quantile(u));
}

Sobol::Sobol(std::size_t dims) : dims_(dims) {
  if (dims == 0 || dims > kSobolMaxDims)
    throw Error(ErrorKind::dimension_too_large,
                "Sobol sequence supports 1.." + std::to_string(kSobolMaxDims) + " dimensions, got " +
                    std::to_string(dims));
  v_.assign(dims, std::vector<std::uint64_t>(kSobolBits + 1, 0));
  for (int k = 1; k <= kSobolBits; ++k) v_[0][k] = std::uint64_t{1} << (kSobolBits - k);
  for (std::size_t j = 1; j < dims; ++j) {
    const SobolEntry& e = kSobolTable[j - 1];
    const int s = e.degree;
    std::vector<std::uint64_t> m(kSobolBits + 1, 0);
    for (int k = 1; k <= s && k <= kSobolBits; ++k) m[k] = static_cast<std::uint64_t>(e.m[k - 1]);
    for (int k = s + 1; k <= kSobolBits; ++k) {
      std::uint64_t val = m[k - s] ^ (m[k - s] << s);
      for (int i = 1; i < s; ++i)
        if ((e.a >> (s - 1 - i)) & 1) val ^= m[k - i] << i;
      m[k] = val;
    }
    for (int k = 1; k <= kSobolBits; ++k) v_[j][k] = m[k] << (kSobolBits - k);
  }
  x_.assign(dims, 0);
}

void Sobol::next(double* out) {
  // gray-code update: flip the direction number of the lowest zero bit of index
  int c = 1;
  std::uint64_t i = index_;
  while (i & 1) {
    i >>= 1;
    ++c;
  }
  ++index_;
  for (std::size_t j = 0; j < dims_; ++j) {
    x_[j] ^= v_[j][c];
    out[j] = static_cast<double>(x_[j]) * 0x1.0p-52;
  }
}

void Sobol::point(std::uint64_t i, double* out) const {
  const std::uint64_t g = i ^ (i >> 1);
  for (std::size_t j = 0; j < dims_; ++j) {
    std::uint64_t x = 0;
    for (int k = 1; k <= kSobolBits; ++k)
      if ((g >> (k - 1)) & 1) x ^= v_[j][k];
    out[j] = static_cast<double>(x) * 0x1.0p-52;
  }
}

}  // namespace pwr
