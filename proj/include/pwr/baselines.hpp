#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pwr/exec.hpp"
#include "pwr/quadrature.hpp"
#include "pwr/system.hpp"

namespace pwr {

struct Histogram {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;
};

// 50 bins over [mean - 4 sd, mean + 4 sd]; values outside are not counted.
Histogram make_histogram(const std::string& name, const std::vector<double>& values, double mean, double var,
                         std::size_t bins = 50);

struct ObservableStats {
  TimeGrid grid;
  std::vector<std::string> names;
  Eigen::MatrixXd mean;  // points x observables
  Eigen::MatrixXd var;   // points x observables
  std::vector<Histogram> histograms;  // final time
};

// Streaming mean/variance in a fixed accumulation order.
class MomentAccumulator {
 public:
  MomentAccumulator(Eigen::Index rows, Eigen::Index cols);
  void add(const Eigen::MatrixXd& sample);
  std::size_t count() const { return n_; }
  Eigen::MatrixXd mean() const { return mean_; }
  Eigen::MatrixXd variance() const;  // unbiased

 private:
  std::size_t n_ = 0;
  Eigen::MatrixXd mean_, m2_;
};

struct SamplingResult {
  ObservableStats stats;
  Eigen::MatrixXd std_error;  // points x observables
  std::size_t evaluations = 0;
};

SamplingResult mc_run(const NetworkSystem& sys, std::size_t samples, std::uint64_t seed,
                      ExecPolicy policy = ExecPolicy::parallel, std::size_t bins = 50);

SamplingResult qmc_run(const NetworkSystem& sys, std::size_t samples, ExecPolicy policy = ExecPolicy::parallel,
                       std::size_t bins = 50);

struct PcmOptions {
  int level = 5;
  int total_order = -1;  // -1: level - 1
  double q_max = kDefaultQmax;
  ExecPolicy policy = ExecPolicy::parallel;
  std::size_t bins = 50;
  std::size_t hist_samples = 4096;
};

struct PcmResult {
  OrthoBasis basis;
  Eigen::MatrixXd state_coeffs;       // N x (points * n), column k * n + s
  Eigen::MatrixXd observable_coeffs;  // N x (points * observables)
  ObservableStats stats;
  std::size_t evaluations = 0;
};

// Monolithic tensor-grid collocation over every parameter.
PcmResult full_grid_pcm(const NetworkSystem& sys, const PcmOptions& opt);

struct CostPrediction {
  BigInt full;
  BigInt pwr;
  double ratio = 0.0;
};

// R_F = l^p; R_I = 1 + sum_i l_s^{p_i} + I_max * sum_i l_s^{p_i} * prod_{j != i} l_c^{p_j}
CostPrediction predicted_cost(const std::vector<int>& p, int l, int ls, int lc, int i_max);

}  // namespace pwr
