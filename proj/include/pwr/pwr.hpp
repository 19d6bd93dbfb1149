#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pwr/baselines.hpp"
#include "pwr/graph.hpp"
#include "pwr/ortho_basis.hpp"
#include "pwr/quadrature.hpp"
#include "pwr/relaxation.hpp"
#include "pwr/system.hpp"

namespace pwr {

struct PwrConfig {
  int ls = 5;  // local grid level
  int lc = 2;  // indirect grid level
  // per-subsystem orders; empty uses the defaults (-1: level - 1)
  std::vector<int> local_order;
  std::vector<int> indirect_order;
  int default_local_order = -1;
  int default_indirect_order = -1;
  int total_order = -1;  // -1: max of the two orders of each subsystem
  double eps = 1e-4;
  std::size_t max_iter = 50;
  // first iteration whose neighbor expansions are projected onto W^{Sigma_i};
  // before it, parameters outside Sigma_i are held at their means
  std::size_t project_from_iteration = 3;
  double q_max = kDefaultQmax;
  // observable moments: tensor grid at level ls while ls^p fits the budget,
  // otherwise Sobol sampling of the surrogate
  double observable_grid_budget = 1e5;
  std::size_t observable_samples = 4096;
  int observable_order = -1;  // total order of the observable projection, -1: ls - 1
  bool track_history = true;
  std::uint64_t seed = 0;  // surrogate sampling above the Sobol dimension limit
  std::size_t bins = 50;
  ExecPolicy policy = ExecPolicy::parallel;

  int local_order_of(std::size_t i) const;
  int indirect_order_of(std::size_t i) const;
  int total_order_of(std::size_t i) const;
};

// Coefficient waveforms of one subsystem over its basis.
struct SubsystemExpansion {
  std::vector<std::size_t> states;
  OrthoBasis basis;
  Eigen::MatrixXd coeffs;   // N x (points * states), column k * states + s
  Eigen::MatrixXd dcoeffs;  // time derivatives, same layout; empty for algebraic systems

  std::size_t points() const { return states.empty() ? 0 : static_cast<std::size_t>(coeffs.cols()) / states.size(); }
  // points x states
  Eigen::MatrixXd mean() const;
  Eigen::MatrixXd variance() const;
};

struct PwrReport {
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> changes;  // per iteration, against the previous iterate
  std::vector<ObservableStats> history;
  std::size_t evaluations = 0;
  BigInt predicted_evaluations = 0;
  std::vector<std::size_t> first_grid_sizes;  // per subsystem
  std::vector<std::size_t> grid_sizes;        // per subsystem, iterations >= 2
  WrReport relaxation;                        // intrusive solves only
};

struct PwrResult {
  TimeGrid grid;
  std::vector<SubsystemExpansion> subsystems;
  ObservableStats stats;
  PwrReport report;
};

// Evaluation count implied by the grids: 1 + sum_i Q_i^(1) + iterations_after_first * sum_i Q_i.
BigInt expected_evaluations(const std::vector<std::size_t>& first, const std::vector<std::size_t>& later,
                            std::size_t iterations);

PwrResult pwr_nonintrusive(const NetworkSystem& sys, const Decomposition& d, const PwrConfig& cfg);

struct IntrusiveOptions {
  bool adaptive = false;
  AwrOptions awr;  // awr.wr also configures the plain solve
};

// WR on the approximate Galerkin system assembled pseudo-spectrally.
PwrResult pwr_intrusive(const NetworkSystem& sys, const Decomposition& d, const PwrConfig& cfg,
                        const IntrusiveOptions& opt);

// Full state vector of the surrogate at time index k.
void eval_surrogate(const std::vector<SubsystemExpansion>& subs, const double* xi_global, std::size_t k,
                    double* x);

ObservableStats surrogate_stats(const NetworkSystem& sys, const std::vector<SubsystemExpansion>& subs,
                                const TimeGrid& grid, const PwrConfig& cfg);

}  // namespace pwr
