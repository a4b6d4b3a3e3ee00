#include "homd/normal_filter.hpp"

#include "homd/error.hpp"
#include "homd/operators.hpp"

#include <cmath>
#include <string>

namespace homd {

namespace {

constexpr double kZeroNormalNorm = 1e-12;

// Splitting p = D N: the operator, the measure of the aux inner product, and
// D' diag(measure) which maps aux fields back into area-scaled face space.
struct SplitModel {
  SparseMatrix op;
  Eigen::VectorXd measure;
  SparseMatrix adjoint_scaled;
};

SplitModel make_model(const Mesh& mesh, FilterRegularizer regularizer) {
  SplitModel m;
  if (regularizer == FilterRegularizer::kHighOrder) {
    m.op = second_diff_matrix(mesh);
    m.measure = Eigen::Map<const Eigen::VectorXd>(mesh.line_lengths().data(), mesh.num_lines());
  } else {
    m.op = laplace_matrix(mesh);
    m.measure = Eigen::Map<const Eigen::VectorXd>(mesh.face_areas().data(), mesh.num_faces());
  }
  m.adjoint_scaled = SparseMatrix(m.op.transpose()) * m.measure.asDiagonal();
  return m;
}

Eigen::VectorXd area_vector(const Mesh& mesh) {
  return Eigen::Map<const Eigen::VectorXd>(mesh.face_areas().data(), mesh.num_faces());
}

// Area-scaled normal equations: (r D' W D + alpha S) N = D' W (r p + lambda) + alpha S N_in.
SparseMatrix system_matrix(const Mesh& mesh, const SplitModel& model, double alpha, double r_p) {
  SparseMatrix a = r_p * SparseMatrix(model.adjoint_scaled * model.op);
  SparseMatrix mass(mesh.num_faces(), mesh.num_faces());
  mass.setIdentity();
  mass = alpha * (mass * area_vector(mesh).asDiagonal());
  a += mass;
  a.makeCompressed();
  return a;
}

struct SolveParams {
  double alpha = 0.0;
  double r_p = 0.0;
  int cg_max_iterations = 10;
  double cg_tolerance = 1e-6;
  bool project = true;
};

NSubResult n_sub(const Mesh& mesh, const SplitModel& model, const SparseMatrix& system,
                 const Values& previous, bool have_previous, const Values& aux,
                 const Values& multiplier, const Values& input, const SolveParams& params) {
  const Eigen::VectorXd areas = area_vector(mesh);
  const Values rhs = model.adjoint_scaled * (params.r_p * aux + multiplier) +
                     params.alpha * (areas.asDiagonal() * input);

  NSubResult out;
  out.unprojected = FaceField(previous);
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
    Eigen::VectorXd x = previous.col(c);
    out.cg.push_back(conjugate_gradient(system, rhs.col(c), x, params.cg_max_iterations,
                                        params.cg_tolerance));
    out.unprojected.values.col(c) = x;
  }

  out.normals = out.unprojected;
  if (!params.project) return out;
  for (Eigen::Index t = 0; t < out.normals.size(); ++t) {
    const double n = out.normals.values.row(t).norm();
    if (n >= kZeroNormalNorm) {
      out.normals.values.row(t) /= n;
    } else if (have_previous) {
      out.normals.values.row(t) = previous.row(t);
      ++out.kept_normals;
    } else {
      throw Error(ErrorCode::kZeroNormal,
                  "face " + std::to_string(t) + " has a vanishing normal and no previous iterate");
    }
  }
  return out;
}

void shrink_rows(Values& xi, std::span<const double> weights, double r_p) {
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < xi.rows(); ++i) {
    const double magnitude = xi.row(i).norm();
    const double threshold = weights[i] / r_p;
    if (magnitude <= threshold) {
      xi.row(i).setZero();
    } else {
      xi.row(i) *= 1.0 - threshold / magnitude;
    }
  }
}

std::vector<double> weights_from_differences(const Values& diff) {
  std::vector<double> w(diff.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < diff.rows(); ++i) w[i] = dynamic_weight(diff.row(i).norm());
  return w;
}

double model_energy(const Mesh& mesh, const SplitModel& model, const Values& normals,
                    const Values& input, std::span<const double> weights, double alpha) {
  const Values diff = model.op * normals;
  double regularizer = 0.0;
  for (Eigen::Index i = 0; i < diff.rows(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    regularizer += w * diff.row(i).norm() * model.measure[i];
  }
  const FaceField delta(normals - input);
  return regularizer + 0.5 * alpha * inner_product(mesh, delta, delta);
}

struct AlmParams {
  SolveParams solve;
  double eps = 1e-4;
  int max_iterations = 100;
  bool dynamic_weights = true;
  bool trace_with_unit_weights = false;
  FilterRegularizer regularizer = FilterRegularizer::kHighOrder;
};

std::vector<double> dynamic_weights_for(const Mesh& mesh, const SplitModel& model,
                                        const Values& normals, FilterRegularizer regularizer) {
  if (regularizer == FilterRegularizer::kHighOrder) {
    return weights_from_differences(model.op * normals);
  }
  return face_weights(mesh, FaceField(normals));
}

FilterState run_alm(const Mesh& mesh, const Values& input, const AlmParams& params) {
  const SplitModel model = make_model(mesh, params.regularizer);
  const SparseMatrix system = system_matrix(mesh, model, params.solve.alpha, params.solve.r_p);
  const Eigen::Index rows = model.op.rows();
  const Eigen::Index channels = input.cols();
  const double r_p = params.solve.r_p;

  FilterState state;
  state.normals = FaceField(mesh.num_faces(), channels);
  state.aux = Values::Zero(rows, channels);
  state.multiplier = Values::Zero(rows, channels);
  state.weights.assign(rows, 1.0);
  const std::vector<double> unit_weights(rows, 1.0);

  for (int k = 0; k < params.max_iterations; ++k) {
    // 1. N-subproblem with (lambda^k, p^(k-1)), then projection.
    NSubResult sub = n_sub(mesh, model, system, state.normals.values, k > 0, state.aux,
                           state.multiplier, input, params.solve);
    state.kept_normals += sub.kept_normals;
    const FaceField change(sub.normals.values - state.normals.values);
    state.normals = std::move(sub.normals);

    // 2. p-subproblem by shrinkage.
    const Values diff = model.op * state.normals.values;
    state.aux = diff - state.multiplier / r_p;
    shrink_rows(state.aux, state.weights, r_p);

    // 3. Multiplier.
    const Values residual = state.aux - diff;
    state.multiplier += r_p * residual;
    double residual_sq = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      residual_sq += model.measure[i] * residual.row(i).squaredNorm();
    }

    // 4. Weights from N^k.
    if (params.dynamic_weights) {
      state.weights = dynamic_weights_for(mesh, model, state.normals.values, params.regularizer);
    }

    const double energy =
        model_energy(mesh, model, state.normals.values, input,
                     params.trace_with_unit_weights ? unit_weights : state.weights,
                     params.solve.alpha);
    if (!std::isfinite(energy)) {
      throw Error(ErrorCode::kNonFinite,
                  "energy is not finite at iteration " + std::to_string(k + 1));
    }
    const double delta = norm(mesh, change);
    state.energy_trace.push_back(energy);
    state.change_trace.push_back(delta);
    state.residual_trace.push_back(std::sqrt(residual_sq));
    state.iterations = k + 1;
    if (delta < params.eps) {
      state.converged = true;
      break;
    }
  }
  return state;
}

void check_input(const Mesh& mesh, const FaceField& normals, Eigen::Index channels) {
  if (normals.size() != mesh.num_faces()) {
    throw Error(ErrorCode::kMeshMismatch, "field has " + std::to_string(normals.size()) +
                                              " rows for " + std::to_string(mesh.num_faces()) +
                                              " faces");
  }
  if (normals.channels() != channels) {
    throw Error(ErrorCode::kChannelMismatch,
                "expected " + std::to_string(channels) + " channels");
  }
  if (!normals.values.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "input field has non-finite entries");
  }
}

}  // namespace

void FilterConfig::validate() const {
  if (!(alpha > 0.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be positive");
  if (!(r_p > 0.0)) throw Error(ErrorCode::kInvalidArgument, "r_p must be positive");
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  if (max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");
  if (cg_max_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "cg_max_iterations must be >= 1");
  }
  if (!(cg_tolerance >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "cg_tolerance < 0");
}

double dynamic_weight(double magnitude) {
  const double sq = magnitude * magnitude;
  return std::exp(-sq * sq);
}

std::vector<double> line_weights(const Mesh& mesh, const FaceField& normals) {
  check_input(mesh, normals, normals.channels());
  return weights_from_differences(second_diff(mesh, normals).values);
}

std::vector<double> face_weights(const Mesh& mesh, const FaceField& normals) {
  check_input(mesh, normals, normals.channels());
  std::vector<double> w(mesh.num_faces());
#pragma omp parallel for schedule(static)
  for (int t = 0; t < mesh.num_faces(); ++t) {
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(normals.channels());
    for (int n : mesh.face_neighbors(t)) sum += normals.values.row(t) - normals.values.row(n);
    w[t] = dynamic_weight(sum.norm());
  }
  return w;
}

Eigen::VectorXd shrink(const Eigen::VectorXd& xi, double weight, double r_p) {
  const double magnitude = xi.norm();
  const double threshold = weight / r_p;
  if (magnitude <= threshold) return Eigen::VectorXd::Zero(xi.size());
  return (1.0 - threshold / magnitude) * xi;
}

NSubResult solve_n_sub(const Mesh& mesh, const FilterState& state, const FaceField& input_normals,
                       const FilterConfig& config) {
  check_input(mesh, input_normals, input_normals.channels());
  if (!(config.alpha > 0.0) || !(config.r_p >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "N-subproblem needs alpha > 0 and r_p >= 0");
  }
  const SplitModel model = make_model(mesh, config.regularizer);
  const SparseMatrix system = system_matrix(mesh, model, config.alpha, config.r_p);
  const Eigen::Index channels = input_normals.channels();

  const bool have_previous = state.normals.size() == mesh.num_faces();
  const Values previous = have_previous ? state.normals.values
                                        : Values::Zero(mesh.num_faces(), channels);
  const Values aux = state.aux.size() ? state.aux : Values::Zero(model.op.rows(), channels);
  const Values multiplier =
      state.multiplier.size() ? state.multiplier : Values::Zero(model.op.rows(), channels);
  if (aux.rows() != model.op.rows() || multiplier.rows() != model.op.rows()) {
    throw Error(ErrorCode::kMeshMismatch, "auxiliary fields do not match the regularizer");
  }

  SolveParams params;
  params.alpha = config.alpha;
  params.r_p = config.r_p;
  params.cg_max_iterations = config.cg_max_iterations;
  params.cg_tolerance = config.cg_tolerance;
  return n_sub(mesh, model, system, previous, have_previous && previous.allFinite() &&
                                                  previous.rowwise().norm().minCoeff() > 0.0,
               aux, multiplier, input_normals.values, params);
}

LineField solve_p_sub(const Mesh& mesh, const FaceField& normals, const LineField& multiplier,
                      std::span<const double> weights, double r_p) {
  if (!(r_p > 0.0)) throw Error(ErrorCode::kInvalidArgument, "r_p must be positive");
  if (weights.size() != static_cast<std::size_t>(mesh.num_lines())) {
    throw Error(ErrorCode::kWeightShapeMismatch, "need one weight per line");
  }
  LineField p = second_diff(mesh, normals);
  if (multiplier.size() != p.size() || multiplier.channels() != p.channels()) {
    throw Error(ErrorCode::kChannelMismatch, "multiplier does not match the normal field");
  }
  p.values -= multiplier.values / r_p;
  shrink_rows(p.values, weights, r_p);
  return p;
}

LineField update_multiplier(const Mesh& mesh, const LineField& multiplier, const LineField& aux,
                            const FaceField& normals, double r_p) {
  const LineField diff = second_diff(mesh, normals);
  if (multiplier.size() != diff.size() || aux.size() != diff.size() ||
      multiplier.channels() != diff.channels() || aux.channels() != diff.channels()) {
    throw Error(ErrorCode::kChannelMismatch, "multiplier update shapes differ");
  }
  return LineField(multiplier.values + r_p * (aux.values - diff.values));
}

double filter_energy(const Mesh& mesh, const FaceField& normals, const FaceField& input_normals,
                     std::span<const double> weights, double alpha,
                     FilterRegularizer regularizer) {
  check_input(mesh, normals, input_normals.channels());
  check_input(mesh, input_normals, normals.channels());
  const SplitModel model = make_model(mesh, regularizer);
  if (!weights.empty() && weights.size() != static_cast<std::size_t>(model.op.rows())) {
    throw Error(ErrorCode::kWeightShapeMismatch, "weights do not match the regularizer");
  }
  return model_energy(mesh, model, normals.values, input_normals.values, weights, alpha);
}

FilterState filter_normals(const Mesh& mesh, const FaceField& input_normals,
                           const FilterConfig& config) {
  config.validate();
  check_input(mesh, input_normals, 3);
  AlmParams params;
  params.solve.alpha = config.alpha;
  params.solve.r_p = config.r_p;
  params.solve.cg_max_iterations = config.cg_max_iterations;
  params.solve.cg_tolerance = config.cg_tolerance;
  params.solve.project = true;
  params.eps = config.eps;
  params.max_iterations = config.max_iterations;
  params.dynamic_weights = config.dynamic_weights;
  params.trace_with_unit_weights = config.trace_with_unit_weights;
  params.regularizer = config.regularizer;
  return run_alm(mesh, input_normals.values, params);
}

FilterState filter_normals_laplacian(const Mesh& mesh, const FaceField& input_normals,
                                     FilterConfig config) {
  config.regularizer = FilterRegularizer::kLaplacian;
  return filter_normals(mesh, input_normals, config);
}

FaceField denoise_scalar_field(const Mesh& mesh, const FaceField& noisy, ScalarModel model,
                               const ScalarDenoiseConfig& config) {
  check_input(mesh, noisy, 1);
  FilterConfig check;
  check.alpha = config.alpha;
  check.r_p = config.r_p;
  check.eps = config.eps;
  check.max_iterations = config.max_iterations;
  check.cg_max_iterations = config.cg_max_iterations;
  check.cg_tolerance = config.cg_tolerance;
  check.validate();

  AlmParams params;
  params.solve.alpha = config.alpha;
  params.solve.r_p = config.r_p;
  params.solve.cg_max_iterations = config.cg_max_iterations;
  params.solve.cg_tolerance = config.cg_tolerance;
  params.solve.project = false;
  params.eps = config.eps;
  params.max_iterations = config.max_iterations;
  params.dynamic_weights = false;
  params.regularizer = model == ScalarModel::kHighOrder ? FilterRegularizer::kHighOrder
                                                        : FilterRegularizer::kLaplacian;
  return run_alm(mesh, noisy.values, params).normals;
}

}  // namespace homd
