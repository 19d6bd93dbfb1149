#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "pwr/system.hpp"

namespace pwr {

// Samples of a set of variables on a shared uniform grid, with derivatives for
// cubic Hermite dense output.
struct Waveform {
  TimeGrid grid;
  Eigen::MatrixXd x;   // points x vars
  Eigen::MatrixXd dx;  // points x vars

  std::size_t vars() const { return static_cast<std::size_t>(x.cols()); }

  static Waveform constant(const TimeGrid& grid, const std::vector<double>& values);

  // Value at an RK stage of step n: stage 0 -> t_n, 1/2 -> midpoint, 3 -> t_{n+1}.
  double at_stage(std::size_t step, int stage, std::size_t var) const {
    const auto v = static_cast<Eigen::Index>(var);
    const auto k = static_cast<Eigen::Index>(step);
    if (stage == 0) return x(k, v);
    if (stage == 3) return x(k + 1, v);
    return hermite_mid(x(k, v), x(k + 1, v), dx(k, v), dx(k + 1, v), grid.h());
  }

  void interpolate(double t, double* out) const;
  Trajectory as_trajectory() const { return Trajectory{grid, x, dx}; }
};

// sup over the grid of the max-abs difference
double sup_distance(const Waveform& a, const Waveform& b);

}  // namespace pwr
