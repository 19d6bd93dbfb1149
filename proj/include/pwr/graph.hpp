#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pwr/exec.hpp"
#include "pwr/system.hpp"

namespace pwr {

struct InteractionGraph {
  Eigen::MatrixXd w;  // symmetric, nonnegative, zero diagonal
  Eigen::MatrixXd mean_jacobian;
  Eigen::MatrixXd pattern;  // time average of |J|, used for neighbor structure
  std::size_t size() const { return static_cast<std::size_t>(w.rows()); }
};

struct Decomposition {
  std::size_t m = 0;
  std::vector<std::size_t> assign;
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::vector<std::size_t>> neighbors;
  std::vector<std::vector<std::size_t>> local_params;     // Lambda_i
  std::vector<std::vector<std::size_t>> indirect_params;  // Lambda_i^c
  std::vector<std::vector<std::size_t>> sigma;            // Sigma_i
  Eigen::VectorXd lambda;                                 // Laplacian spectrum when available
  std::size_t gap_at = 0;
  Eigen::MatrixXd embedding;

  void validate(std::size_t n) const;
};

// Clusters from an assignment map; labels are renumbered by first appearance.
Decomposition decomposition_from_assign(const std::vector<std::size_t>& assign);
Decomposition decomposition_from_clusters(const std::vector<std::vector<std::size_t>>& clusters, std::size_t n);

// Time average (trapezoid) of the Jacobian along the nominal trajectory over
// [0, ts]; ts <= 0 uses the system horizon. Algebraic systems use the nominal equilibrium.
InteractionGraph adjacency_from_jacobian(const NetworkSystem& sys, const std::vector<double>& xi_nominal,
                                         double ts = 0.0);
InteractionGraph graph_from_weights(const Eigen::MatrixXd& w);

Eigen::MatrixXd normalized_laplacian(const InteractionGraph& g);

// argmax over 2 <= m <= n/2 of (l_{m+1} - l_m) / (l_m + 1e-12), eigenvalues ascending
std::size_t auto_cluster_count(const Eigen::VectorXd& lambda);

// Farthest-point initialization from row 0, at most 100 Lloyd iterations.
std::vector<std::size_t> kmeans_rows(const Eigen::MatrixXd& rows, std::size_t m);

// m = 0 selects the count from the largest relative gap.
Decomposition spectral_partition(const InteractionGraph& g, std::size_t m = 0);

struct WaveOptions {
  double c = 1.0;
  std::size_t t_max = 4096;
  std::uint64_t seed = 0;
  ExecPolicy policy = ExecPolicy::serial;
};

struct WaveSpectrum {
  std::vector<double> power;          // aggregated |X|^2 per frequency bin
  std::vector<std::size_t> peaks;     // bins, ascending
  std::vector<double> eigenvalues;    // lambda for each peak
  Eigen::MatrixXd coefficients;       // n x peaks, aligned real parts
};

WaveSpectrum wave_spectrum(const InteractionGraph& g, const WaveOptions& opt);

Decomposition wave_equation_cluster(const InteractionGraph& g, std::size_t m, const WaveOptions& opt);

// Fill Lambda_i, neighbor sets, Lambda_i^c and Sigma_i.
void derive_parameter_sets(Decomposition& d, const NetworkSystem& sys, const Eigen::MatrixXd& pattern);

std::vector<std::vector<std::size_t>> connected_components(const Eigen::MatrixXd& w);

}  // namespace pwr
