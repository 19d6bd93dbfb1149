#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pwr/exec.hpp"
#include "pwr/graph.hpp"
#include "pwr/waveform.hpp"

namespace pwr {

// A system of V unknowns split into blocks that are integrated independently
// within a relaxation sweep.
struct BlockOde {
  std::size_t dim = 0;
  std::vector<std::vector<std::size_t>> blocks;  // variable indices per block
  std::vector<std::vector<std::size_t>> deps;    // external variables each block reads
  std::vector<double> x0;
  // dx for the variables of block b; x holds all V entries at time t
  std::function<void(std::size_t b, const double* x, double t, double* dx)> f;
  // full V x V Jacobian, used by the adaptive window estimate
  std::function<Eigen::MatrixXd(const double* x, double t)> jacobian;
};

struct WrOptions {
  double eps = 1e-8;
  std::size_t max_iter = 50;
  ExecPolicy policy = ExecPolicy::serial;
  bool keep_iterates = false;
};

struct WrReport {
  std::size_t iterations = 0;
  std::vector<double> errors;  // sup-norm change per iteration
  bool converged = false;
  std::vector<std::pair<double, double>> windows;
  std::vector<std::size_t> window_iterations;
  std::vector<Waveform> iterates;  // y^0, y^1, ... when requested
};

// One Jacobi-style sweep: every block integrated against `prev`.
Waveform wr_sweep(const BlockOde& sys, const TimeGrid& grid, const Waveform& prev, const std::vector<double>& x0,
                  ExecPolicy policy);

Waveform wr_solve_blocks(const BlockOde& sys, const TimeGrid& grid, const Waveform& initial, const WrOptions& opt,
                         WrReport& report);

struct AwrOptions {
  WrOptions wr;
  int order = 2;                // extrapolation order l
  double initial_window = 0.0;  // <= 0: T/20
  double min_window = 0.0;      // <= 0: T/50
  int r = 5;                    // iteration count assumed by the window bound
};

// Window proposal: doubles the previous length, then shrinks by 1/20 of it
// while the estimated error stays above eps and the length exceeds half the previous one.
double awr_next_window(double prev, double e0_coeff, const std::vector<double>& nodes, double t_start, double mu,
                       double eta, int r, double eps);

Waveform awr_solve_blocks(const BlockOde& sys, const TimeGrid& grid, const AwrOptions& opt, WrReport& report);

// Blocks from a decomposition of a concrete parameter realization.
BlockOde block_ode_from_system(const NetworkSystem& sys, const Decomposition& d, const std::vector<double>& xi);

Trajectory wr_solve(const NetworkSystem& sys, const Decomposition& d, const std::vector<double>& xi,
                    const WrOptions& opt, WrReport& report, const Waveform* initial = nullptr);
Trajectory awr_windows(const NetworkSystem& sys, const Decomposition& d, const std::vector<double>& xi,
                       const AwrOptions& opt, WrReport& report);

// Block-Jacobi relaxation for algebraic systems: each block solved by Newton
// against the previous iterate.
std::vector<double> relax_algebraic(const NetworkSystem& sys, const Decomposition& d, const std::vector<double>& xi,
                                    const WrOptions& opt, WrReport& report);

}  // namespace pwr
