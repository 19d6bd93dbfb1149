#pragma once

#include <stdexcept>
#include <string>

namespace pwr {

enum class ErrorKind {
  invalid_argument,
  index_out_of_range,
  distribution_mismatch,
  length_mismatch,
  grid_too_large,
  integration_diverged,
  singular_jacobian,
  no_convergence,
  isolated_node,
  instability,
  unresolved_peaks,
  indefinite_kernel,
  zero_trace,
  invalid_topology,
  dimension_too_large,
  config_error,
  io_error,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// numerical failures map to exit code 3, everything else to 2
bool is_numerical(ErrorKind kind);

}  // namespace pwr
