#pragma once

#include "homd/operators.hpp"

#include <Eigen/Core>

#include <vector>

namespace homd {

struct CgReport {
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  bool converged = false;
  /// Quadratic objective 0.5 x'Ax - b'x after each iterate, starting with the
  /// initial guess. CG decreases it monotonically on SPD systems.
  std::vector<double> objective;
};

/// Jacobi-preconditioned conjugate gradient on a symmetric positive definite
/// system. Starts from x, stops after max_iterations or once
/// |r| <= relative_tolerance * |b|.
CgReport conjugate_gradient(const SparseMatrix& a, const Eigen::VectorXd& b,
                            Eigen::Ref<Eigen::VectorXd> x, int max_iterations,
                            double relative_tolerance);

}  // namespace homd
