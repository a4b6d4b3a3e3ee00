#include "homd/linear_solve.hpp"

#include <cmath>

namespace homd {

CgReport conjugate_gradient(const SparseMatrix& a, const Eigen::VectorXd& b,
                            Eigen::Ref<Eigen::VectorXd> x, int max_iterations,
                            double relative_tolerance) {
  CgReport report;
  const Eigen::VectorXd inv_diag = a.diagonal().cwiseInverse();
  Eigen::VectorXd r = b - a * x;
  auto objective = [&] { return -0.5 * x.dot(b) - 0.5 * x.dot(r); };

  const double b_norm = b.norm();
  const double threshold = relative_tolerance * (b_norm > 0.0 ? b_norm : 1.0);
  report.initial_residual = r.norm();
  report.final_residual = report.initial_residual;
  report.objective.push_back(objective());
  if (report.initial_residual <= threshold) {
    report.converged = true;
    return report;
  }

  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd d = z;
  double rz = r.dot(z);
  Eigen::VectorXd ad(x.size());
  for (int k = 0; k < max_iterations; ++k) {
    ad.noalias() = a * d;
    const double curvature = d.dot(ad);
    if (!(curvature > 0.0)) break;
    const double step = rz / curvature;
    x += step * d;
    r -= step * ad;
    report.iterations = k + 1;
    report.final_residual = r.norm();
    report.objective.push_back(objective());
    if (report.final_residual <= threshold) {
      report.converged = true;
      break;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    d = z + (rz_next / rz) * d;
    rz = rz_next;
  }
  return report;
}

}  // namespace homd
