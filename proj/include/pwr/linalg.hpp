#pragma once

#include <Eigen/Dense>

namespace pwr {

struct SymEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column k pairs with values[k]
  int sweeps = 0;
};

// Cyclic Jacobi rotations for a symmetric matrix.
SymEigen jacobi_eigen(const Eigen::MatrixXd& a, double tol = 1e-14, int max_sweeps = 100);

// Induced infinity norm (max absolute row sum).
double inf_norm(const Eigen::MatrixXd& a);

}  // namespace pwr
