#include "homd/vertex_update.hpp"

#include "homd/error.hpp"

#include <ceres/ceres.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace homd {

namespace {

constexpr double kDegenerateCross = 1e-14;

void check_shapes(const Mesh& mesh, const Positions& v, const FaceField& normals,
                  std::span<const double> areas, const Positions* v_in) {
  if (v.rows() != mesh.num_vertices() || (v_in && v_in->rows() != mesh.num_vertices())) {
    throw Error(ErrorCode::kMeshMismatch, "positions do not match the mesh vertex count");
  }
  if (normals.size() != mesh.num_faces() ||
      areas.size() != static_cast<std::size_t>(mesh.num_faces())) {
    throw Error(ErrorCode::kMeshMismatch, "need one normal and one area per face");
  }
  if (normals.channels() != 3) {
    throw Error(ErrorCode::kChannelMismatch, "normals must have 3 channels");
  }
}

Vec3 row(const Positions& v, int i) { return v.row(i).transpose(); }

Vec3 face_cross(const Positions& v, const Triangle& t) {
  const Vec3 a = row(v, t[0]);
  return (row(v, t[1]) - a).cross(row(v, t[2]) - a);
}

// Index of the first face whose cross product is below the guard, or -1.
int first_degenerate(const Mesh& mesh, const Positions& v, std::span<const double> areas) {
  for (int t = 0; t < mesh.num_faces(); ++t) {
    const double c = face_cross(v, mesh.triangle(t)).norm();
    if (!(c > kDegenerateCross * areas[t])) return t;
  }
  return -1;
}

void throw_degenerate(int face) {
  throw Error(ErrorCode::kDegenerateFace, "face " + std::to_string(face) + " is degenerate");
}

double alignment_energy(const Mesh& mesh, const Positions& v, const FaceField& normals,
                        std::span<const double> areas) {
  double sum = 0.0;
#pragma omp parallel for reduction(+ : sum) schedule(static)
  for (int t = 0; t < mesh.num_faces(); ++t) {
    const Vec3 c = face_cross(v, mesh.triangle(t));
    sum -= areas[t] * normals.values.row(t).dot(c.transpose()) / c.norm();
  }
  return sum;
}

// Face-parallel evaluation into per-corner buffers, then a vertex-parallel
// gather so the result does not depend on the thread count.
void alignment_gradient(const Mesh& mesh, const Positions& v, const FaceField& normals,
                        std::span<const double> areas, Positions& grad) {
  std::vector<Vec3> corner(static_cast<std::size_t>(3) * mesh.num_faces());
#pragma omp parallel for schedule(static)
  for (int t = 0; t < mesh.num_faces(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const Vec3 c = face_cross(v, tri);
    const double twice_area = c.norm();
    const Vec3 current = c / twice_area;
    const Vec3 target = normals.values.row(t).transpose();
    const Vec3 g = areas[t] * (target.dot(current) * current - target) / twice_area;
    for (int j = 0; j < 3; ++j) {
      const Vec3 opposite = row(v, tri[(j + 2) % 3]) - row(v, tri[(j + 1) % 3]);
      corner[3 * t + j] = g.cross(opposite);
    }
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    Vec3 sum = Vec3::Zero();
    for (int t : mesh.vertex_faces(i)) {
      const Triangle& tri = mesh.triangle(t);
      const int j = tri[0] == i ? 0 : (tri[1] == i ? 1 : 2);
      sum += corner[3 * t + j];
    }
    grad.row(i) += sum.transpose();
  }
}

class VertexEnergy final : public ceres::FirstOrderFunction {
 public:
  VertexEnergy(const Mesh& mesh, const FaceField& normals, std::span<const double> areas,
               const Positions& v_in, double eta)
      : mesh_(mesh), normals_(normals), areas_(areas), v_in_(v_in), eta_(eta) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    const Eigen::Map<const Positions> v(parameters, mesh_.num_vertices(), 3);
    const Positions positions = v;
    if (!positions.allFinite() || first_degenerate(mesh_, positions, areas_) >= 0) return false;
    *cost = alignment_energy(mesh_, positions, normals_, areas_) +
            0.5 * eta_ * (positions - v_in_).squaredNorm();
    if (gradient) {
      Positions g = eta_ * (positions - v_in_);
      alignment_gradient(mesh_, positions, normals_, areas_, g);
      Eigen::Map<Positions>(gradient, mesh_.num_vertices(), 3) = g;
    }
    return std::isfinite(*cost);
  }

  int NumParameters() const override { return 3 * mesh_.num_vertices(); }

 private:
  const Mesh& mesh_;
  const FaceField& normals_;
  std::span<const double> areas_;
  const Positions& v_in_;
  double eta_;
};

class EnergyRecorder final : public ceres::IterationCallback {
 public:
  explicit EnergyRecorder(std::vector<double>& trace) : trace_(trace) {}

  ceres::CallbackReturnType operator()(const ceres::IterationSummary& summary) override {
    if (summary.iteration == 0 || summary.step_is_successful) trace_.push_back(summary.cost);
    return ceres::SOLVER_CONTINUE;
  }

 private:
  std::vector<double>& trace_;
};

}  // namespace

void UpdateConfig::validate() const {
  if (!(eta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eta must be positive");
  if (max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");
  if (!(gradient_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gradient_tolerance must be positive");
  }
  if (!(sufficient_decrease > 0.0) || !(curvature < 1.0) || !(sufficient_decrease < curvature)) {
    throw Error(ErrorCode::kInvalidArgument, "line search needs 0 < c1 < c2 < 1");
  }
  if (history < 1) throw Error(ErrorCode::kInvalidArgument, "history must be >= 1");
}

double energy_v(const Mesh& mesh, const Positions& v, const FaceField& normals,
                std::span<const double> areas, const Positions& v_in, double eta) {
  check_shapes(mesh, v, normals, areas, &v_in);
  if (const int t = first_degenerate(mesh, v, areas); t >= 0) throw_degenerate(t);
  return alignment_energy(mesh, v, normals, areas) + 0.5 * eta * (v - v_in).squaredNorm();
}

Positions gradient_v(const Mesh& mesh, const Positions& v, const FaceField& normals,
                     std::span<const double> areas, const Positions& v_in, double eta) {
  check_shapes(mesh, v, normals, areas, &v_in);
  if (const int t = first_degenerate(mesh, v, areas); t >= 0) throw_degenerate(t);
  Positions grad = eta * (v - v_in);
  alignment_gradient(mesh, v, normals, areas, grad);
  return grad;
}

UpdateResult update_vertices(const Mesh& mesh, const FaceField& normals,
                             const UpdateConfig& config) {
  config.validate();
  const Positions& v_in = mesh.vertices();
  const std::span<const double> areas = mesh.face_areas();
  check_shapes(mesh, v_in, normals, areas, nullptr);

  UpdateResult result;
  result.vertices = v_in;
  if (mesh.num_vertices() == 0) return result;

  ceres::GradientProblemSolver::Options options;
  options.line_search_direction_type = ceres::LBFGS;
  options.line_search_type = ceres::WOLFE;
  options.max_lbfgs_rank = config.history;
  options.line_search_sufficient_function_decrease = config.sufficient_decrease;
  options.line_search_sufficient_curvature_decrease = config.curvature;
  options.max_num_iterations = config.max_iterations;
  // Ceres tests the largest gradient component. Dividing by sqrt(3) makes
  // that bound imply |grad|_2 <= tol * sqrt(V) * diagonal.
  const double gradient_bound = config.gradient_tolerance *
                                std::sqrt(static_cast<double>(mesh.num_vertices())) *
                                mesh.bounding_box_diagonal();
  options.gradient_tolerance =
      config.gradient_tolerance * mesh.bounding_box_diagonal() / std::sqrt(3.0);
  options.function_tolerance = 1e-15;
  options.parameter_tolerance = 1e-15;
  options.logging_type = ceres::SILENT;
  EnergyRecorder recorder(result.energy_trace);
  options.callbacks.push_back(&recorder);

  // GradientProblem owns the function.
  ceres::GradientProblem problem(new VertexEnergy(mesh, normals, areas, v_in, config.eta));
  Positions v = v_in;
  double initial_cost = 0.0;
  if (!problem.Evaluate(v.data(), &initial_cost, nullptr)) {
    if (const int t = first_degenerate(mesh, v, areas); t >= 0) throw_degenerate(t);
    throw Error(ErrorCode::kNonFinite, "vertex energy is not finite at the input");
  }

  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(options, problem, v.data(), &summary);
  result.vertices = v;
  result.iterations = std::max(0, static_cast<int>(summary.iterations.size()) - 1);
  result.termination = summary.message;
  Positions grad = config.eta * (v - v_in);
  alignment_gradient(mesh, v, normals, areas, grad);
  result.converged = grad.norm() <= gradient_bound;
  // A zero-length step ends the run through the parameter test; that is a
  // stalled line search, not convergence.
  result.line_search_failed =
      summary.termination_type == ceres::FAILURE ||
      (!result.converged && summary.termination_type == ceres::CONVERGENCE);
  result.foldover_count = foldover_count(mesh, result.vertices, normals);
  return result;
}

double sun_energy(const Mesh& mesh, const Positions& v, const FaceField& normals,
                  std::span<const double> areas) {
  check_shapes(mesh, v, normals, areas, nullptr);
  double sum = 0.0;
#pragma omp parallel for reduction(+ : sum) schedule(static)
  for (int t = 0; t < mesh.num_faces(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const Vec3 n = normals.values.row(t).transpose();
    for (int j = 0; j < 3; ++j) {
      const double d = n.dot(row(v, tri[j]) - row(v, tri[(j + 1) % 3]));
      sum += areas[t] * d * d;
    }
  }
  return sum;
}

UpdateResult sun_update(const Mesh& mesh, const FaceField& normals, int iterations) {
  const std::span<const double> areas = mesh.face_areas();
  check_shapes(mesh, mesh.vertices(), normals, areas, nullptr);
  if (iterations < 0) throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 0");

  UpdateResult result;
  result.vertices = mesh.vertices();
  Positions next = result.vertices;
  result.energy_trace.push_back(sun_energy(mesh, result.vertices, normals, areas));
  for (int k = 0; k < iterations; ++k) {
    const Positions& v = result.vertices;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < mesh.num_vertices(); ++i) {
      Vec3 step = Vec3::Zero();
      double weight = 0.0;
      for (int t : mesh.vertex_faces(i)) {
        const Triangle& tri = mesh.triangle(t);
        const Vec3 centroid = (row(v, tri[0]) + row(v, tri[1]) + row(v, tri[2])) / 3.0;
        const Vec3 n = normals.values.row(t).transpose();
        step += areas[t] * n * n.dot(row(v, i) - centroid);
        weight += areas[t];
      }
      next.row(i) = v.row(i);
      if (weight > 0.0) next.row(i) -= step.transpose() / weight;
    }
    std::swap(result.vertices, next);
    result.energy_trace.push_back(sun_energy(mesh, result.vertices, normals, areas));
    result.iterations = k + 1;
  }
  result.foldover_count = foldover_count(mesh, result.vertices, normals);
  return result;
}

int foldover_count(const Mesh& mesh, const Positions& v, const FaceField& normals) {
  check_shapes(mesh, v, normals, mesh.face_areas(), nullptr);
  int count = 0;
#pragma omp parallel for reduction(+ : count) schedule(static)
  for (int t = 0; t < mesh.num_faces(); ++t) {
    const Vec3 c = face_cross(v, mesh.triangle(t));
    if (!(normals.values.row(t).dot(c.transpose()) > 0.0)) ++count;
  }
  return count;
}

int foldover_count(const Mesh& mesh, const FaceField& normals) {
  return foldover_count(mesh, mesh.vertices(), normals);
}

}  // namespace homd
