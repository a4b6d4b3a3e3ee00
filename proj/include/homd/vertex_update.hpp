#pragma once

#include "homd/fields.hpp"
#include "homd/mesh.hpp"

#include <span>
#include <string>
#include <vector>

namespace homd {

struct UpdateConfig {
  double eta = 1e-3;  // fidelity weight pulling vertices toward the input
  int max_iterations = 500;
  /// Stop once |grad|_2 <= gradient_tolerance * sqrt(V) * bbox diagonal.
  double gradient_tolerance = 1e-8;
  double sufficient_decrease = 1e-4;  // Wolfe c1
  double curvature = 0.9;             // Wolfe c2
  int history = 8;                    // L-BFGS memory

  /// Throws Error(kInvalidArgument) on non-positive values or c1 >= c2.
  void validate() const;
};

struct UpdateResult {
  Positions vertices;
  /// Energy at the start and after every accepted step.
  std::vector<double> energy_trace;
  int foldover_count = 0;
  int iterations = 0;
  /// The gradient test was met at the returned iterate.
  bool converged = false;
  /// The line search gave up, or stopped making progress before the gradient
  /// test or the iteration cap. `vertices` is still the best iterate found.
  bool line_search_failed = false;
  /// Why the optimiser stopped, for diagnostics.
  std::string termination;
};

/// -sum_t s_t N_t . n_t(v) + (eta/2) |v - v_in|^2, where n_t(v) is the unit
/// normal of face t at positions v and s_t a fixed area (the input areas).
/// Connectivity comes from `mesh`, its coordinates are ignored.
/// Throws Error(kDegenerateFace) naming the face when a cross product vanishes.
double energy_v(const Mesh& mesh, const Positions& v, const FaceField& normals,
                std::span<const double> areas, const Positions& v_in, double eta);

/// Analytic gradient of energy_v, one row per vertex:
///   sum_t s_t ((N.n) n - N) x (v_k - v_j) / (2 S_t) + eta (v_i - v_in_i)
/// with S_t the current area and (i, j, k) the face in counterclockwise order
/// starting at vertex i.
Positions gradient_v(const Mesh& mesh, const Positions& v, const FaceField& normals,
                     std::span<const double> areas, const Positions& v_in, double eta);

/// Minimises energy_v with L-BFGS and a Wolfe line search, starting at the
/// mesh's own vertices, which also serve as v_in and supply the areas s_t.
UpdateResult update_vertices(const Mesh& mesh, const FaceField& normals,
                             const UpdateConfig& config = {});

/// sum_t s_t sum over the edges (i, j) of t of (N_t . (v_i - v_j))^2.
double sun_energy(const Mesh& mesh, const Positions& v, const FaceField& normals,
                  std::span<const double> areas);

/// Baseline: gradient descent on sun_energy. Each sweep moves every vertex by
/// -sum s_t N_t (N_t . (v_i - c_t)) / sum s_t over its faces, c_t the centroid.
/// Blind to the sign of N_t.
UpdateResult sun_update(const Mesh& mesh, const FaceField& normals, int iterations);

/// Faces of `mesh` whose geometric normal has a nonpositive dot product with
/// the target normal. Degenerate faces count as folded.
int foldover_count(const Mesh& mesh, const FaceField& normals);
int foldover_count(const Mesh& mesh, const Positions& v, const FaceField& normals);

}  // namespace homd
