#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pwr/kl.hpp"
#include "pwr/system.hpp"

namespace pwr {

struct KuramotoSpec {
  Eigen::MatrixXd coupling;          // K, n x n
  std::vector<double> omega;         // nominal frequencies
  std::vector<bool> uncertain;       // Gaussian frequency per oscillator
  double tolerance = 0.2;            // sigma = tolerance * omega
  std::vector<double> x0;
  double horizon = 0.5;
  std::size_t steps = 500;
};

// x_i' = omega_i + sum_j K_ij sin(x_j - x_i); observables R and phi.
NetworkSystem kuramoto(const KuramotoSpec& spec);

// Three-oscillator chain with couplings of size eps and all frequencies uncertain.
NetworkSystem kuramoto_chain3(double eps = 0.05, double tolerance = 0.2, double horizon = 1.0,
                              std::size_t steps = 500);

// 80 oscillators in 40 strongly coupled pairs on a weakly coupled ring; every
// other oscillator has an uncertain frequency.
struct Kuramoto80Options {
  double intra = 1.0;
  double inter = 0.05;
  double tolerance = 0.2;
  double horizon = 0.5;
  std::size_t steps = 500;
};
NetworkSystem kuramoto80(std::uint64_t seed, const Kuramoto80Options& opt = {});

// R e^{i phi} = mean of e^{i x_j}
std::pair<double, double> sync_order(const double* phases, std::size_t n);

struct StabilitySpec {
  double c = 0.1;
  double v1 = 10.0;
  double v2 = 10.0;
  Distribution a = Distribution::gaussian_tolerance(10.0, 0.2);
  Distribution b = Distribution::gaussian_tolerance(10.0, 0.2);
  std::vector<double> guess{1.0, 1.0};
};

// Residual a x1^2 + c x2^2 - v1, c x1^2 + b x2^2 - v2; observable lambda_max.
NetworkSystem stability_system(const StabilitySpec& spec);

// Largest real part among eigenvalues of [[2a x1, 2c x2], [2c x1, 2b x2]].
double stability_lambda_max(double a, double b, double c, double x1, double x2);

struct ThermalLoad {
  KLModel model;
  double mean = 0.0;   // W
  double scale = 1.0;  // W per unit of the process
};

struct ThermalSpec {
  int zones = 2;
  int walls_per_zone = 4;  // the last wall of each zone is internal
  bool outer_nodes = false;
  double h_nominal = 3.16;  // W/m^2/K
  double k_nominal = 4.65;  // W/m/K
  double tolerance = 0.1;
  double area = 12.0;
  double thickness = 0.2;
  double c_air = 6.0e4;
  double c_wall = 2.0e6;
  double h_out = 25.0;
  double t_amb = 293.0;
  double infiltration = 10.0;  // W/K
  double solar = 200.0;        // W on the first wall of each zone
  double coupling = 20.0;      // W/K between an internal wall and the next zone's air
  double air0 = 300.0;
  double wall0 = 296.0;
  double horizon = 28800.0;
  std::size_t steps = 500;
  std::optional<ThermalLoad> load;  // applied to every zone air node
};

struct ThermalLayout {
  std::vector<std::size_t> air;                  // per zone
  std::vector<std::vector<std::size_t>> walls;   // per zone, inner wall nodes
  std::vector<std::vector<std::size_t>> outer;   // per zone, outer nodes of exterior walls
  std::vector<std::size_t> zone_of;              // per state
};

NetworkSystem thermal_rc(const ThermalSpec& spec, ThermalLayout* layout = nullptr);

// x' = A x + g(t) + G xi; G is n x p, rows own the parameters they touch.
struct LinearSpec {
  Eigen::MatrixXd a;
  Eigen::MatrixXd g;  // n x p, may have zero columns
  std::vector<Distribution> params;
  std::vector<double> x0;
  std::function<void(double t, double* out)> forcing;  // optional
  double horizon = 1.0;
  std::size_t steps = 500;
};
NetworkSystem linear_system(const LinearSpec& spec);

}  // namespace pwr
