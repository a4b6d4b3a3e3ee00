#pragma once

#include "homd/fields.hpp"
#include "homd/linear_solve.hpp"
#include "homd/mesh.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace homd {

enum class FilterRegularizer {
  kHighOrder,  // weighted second differences over lines
  kLaplacian,  // weighted piecewise-constant Laplacian over faces
};

struct FilterConfig {
  double alpha = 0.0;  // fidelity weight
  double r_p = 0.0;    // augmented Lagrangian penalty
  double eps = 1e-4;   // stop once |N^k - N^(k-1)| in V_M drops below this
  int max_iterations = 100;
  int cg_max_iterations = 10;
  double cg_tolerance = 1e-6;
  bool dynamic_weights = true;
  FilterRegularizer regularizer = FilterRegularizer::kHighOrder;
  /// Evaluate the reported energy with unit weights instead of the current
  /// dynamic weights. Diagnostics only, the iteration itself is unchanged.
  bool trace_with_unit_weights = false;

  /// Throws Error(kInvalidArgument) unless alpha, r_p, eps > 0 and the
  /// iteration caps are >= 1.
  void validate() const;
};

/// Iterate of the augmented Lagrangian normal filter.
///
/// `aux` and `multiplier` hold p and lambda_p with one row per line
/// (high-order regularizer, row 3*t + j) or one row per face (Laplacian).
/// `weights` has the same row layout.
struct FilterState {
  FaceField normals;
  Values aux;
  Values multiplier;
  std::vector<double> weights;
  int iterations = 0;
  bool converged = false;
  /// Faces whose pre-projection vector vanished and kept the previous normal.
  int kept_normals = 0;
  /// Per outer iteration: model energy, |N^k - N^(k-1)|, and |p - D N| after
  /// the p-update, in the matching inner-product norms.
  std::vector<double> energy_trace;
  std::vector<double> change_trace;
  std::vector<double> residual_trace;
};

/// exp(-x^4): the dynamic weight for a second-difference magnitude x.
double dynamic_weight(double magnitude);

/// Per-line weights exp(-|N(t+) + N(t-) - 2 N(t)|^4). Lines flanked by a
/// boundary edge get weight 1.
std::vector<double> line_weights(const Mesh& mesh, const FaceField& normals);

/// Per-face weights exp(-|sum over D1(t) of (N(t) - N(t'))|^4).
std::vector<double> face_weights(const Mesh& mesh, const FaceField& normals);

/// Closed-form minimiser of weight*|p| + (r_p/2)|p - xi|^2.
Eigen::VectorXd shrink(const Eigen::VectorXd& xi, double weight, double r_p);

struct NSubResult {
  FaceField normals;      // projected onto the unit sphere face by face
  FaceField unprojected;  // CG solution before projection
  std::vector<CgReport> cg;  // one report per channel
  int kept_normals = 0;
};

/// One N-subproblem: solves
///   r_p D*D N + alpha N = r_p D*p + D*lambda + alpha N_in
/// by CG warm-started at state.normals, then normalises each face. D is the
/// operator selected by config.regularizer and D* its V_M adjoint. r_p may be
/// zero here. A vanishing face vector keeps the previous normal; with no
/// previous unit normal to fall back on it throws Error(kZeroNormal).
NSubResult solve_n_sub(const Mesh& mesh, const FilterState& state, const FaceField& input_normals,
                       const FilterConfig& config);

/// p = shrink(second_diff(N) - lambda / r_p) line by line.
LineField solve_p_sub(const Mesh& mesh, const FaceField& normals, const LineField& multiplier,
                      std::span<const double> weights, double r_p);

/// lambda + r_p (p - second_diff(N)).
LineField update_multiplier(const Mesh& mesh, const LineField& multiplier, const LineField& aux,
                            const FaceField& normals, double r_p);

/// Weighted regularizer plus (alpha/2)|N - N_in|^2 in V_M.
double filter_energy(const Mesh& mesh, const FaceField& normals, const FaceField& input_normals,
                     std::span<const double> weights, double alpha,
                     FilterRegularizer regularizer = FilterRegularizer::kHighOrder);

/// Runs the augmented Lagrangian filter with dynamic weights on noisy face
/// normals. Dispatches on config.regularizer. The result's `normals` is the
/// last iterate. Throws Error(kNonFinite) if the energy stops being finite.
FilterState filter_normals(const Mesh& mesh, const FaceField& input_normals,
                           const FilterConfig& config);

/// filter_normals with the Laplacian regularizer and per-face weights.
FilterState filter_normals_laplacian(const Mesh& mesh, const FaceField& input_normals,
                                     FilterConfig config);

enum class ScalarModel { kHighOrder, kLaplacian };

struct ScalarDenoiseConfig {
  double alpha = 0.0;
  double r_p = 1.0;
  double eps = 1e-10;
  int max_iterations = 1000;
  int cg_max_iterations = 50;
  double cg_tolerance = 1e-12;
};

/// Unweighted, unconstrained minimisation of R(D u) + (alpha/2)|u - f|^2 for a
/// single-channel field, D the second difference or the Laplacian.
FaceField denoise_scalar_field(const Mesh& mesh, const FaceField& noisy, ScalarModel model,
                               const ScalarDenoiseConfig& config);

}  // namespace homd
