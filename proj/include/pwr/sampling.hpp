#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "pwr/distribution.hpp"

namespace pwr {

inline constexpr std::size_t kSobolMaxDims = 64;

std::uint64_t splitmix64(std::uint64_t& state);

// Independent stream seed for a named component.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

enum SeedStream : std::uint64_t {
  kStreamMonteCarlo = 1,
  kStreamWaveCluster = 2,
  kStreamModel = 3,
  kStreamSurrogate = 4,
};

// Uniform in [0,1) from the top 53 bits.
double uniform01(std::mt19937_64& rng);

// Standard normal quantile, rational approximation refined by one Halley step.
double normal_quantile(double p);
double normal_cdf(double x);

// Map a uniform number in (0,1) to a draw from the distribution.
double from_uniform(const Distribution& d, double u);

class Sobol {
 public:
  explicit Sobol(std::size_t dims);
  std::size_t dims() const { return dims_; }
  // Next point; the all-zero first point is skipped.
  void next(double* out);
  // Point with index i >= 1 of the unskipped sequence.
  void point(std::uint64_t i, double* out) const;

 private:
  std::size_t dims_;
  std::vector<std::vector<std::uint64_t>> v_;  // direction numbers scaled to 2^bits
  std::vector<std::uint64_t> x_;
  std::uint64_t index_ = 0;
};

struct SobolEntry {
  int degree;
  int a;
  int m[18];
};
// Direction numbers for dimensions 2..64.
extern const SobolEntry kSobolTable[kSobolMaxDims - 1];

}  // namespace pwr
