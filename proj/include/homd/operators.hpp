#pragma once

#include "homd/fields.hpp"
#include "homd/mesh.hpp"

#include <Eigen/SparseCore>

#include <cmath>
#include <optional>
#include <span>

namespace homd {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Inner products. Multi-channel fields sum channel by channel.
// V_M is weighted by face area, Q_M by edge length, P_M by line length.
// Throw kMeshMismatch on a size mismatch and kChannelMismatch when the
// channel counts differ.
double inner_product(const Mesh& mesh, const FaceField& a, const FaceField& b);
double inner_product(const Mesh& mesh, const EdgeField& a, const EdgeField& b);
double inner_product(const Mesh& mesh, const LineField& a, const LineField& b);

template <class Tag>
double norm(const Mesh& mesh, const Field<Tag>& x) {
  return std::sqrt(inner_product(mesh, x, x));
}

/// Jump across each interior edge, sum of u * sgn(e, t); zero on boundary edges.
EdgeField gradient(const Mesh& mesh, const FaceField& u);

/// Adjoint of -gradient with respect to the Q_M and V_M inner products.
FaceField divergence(const Mesh& mesh, const EdgeField& q);

/// Second difference u(t+) + u(t-) - 2 u(t) on every line; zero when either
/// flanking edge lies on the boundary.
LineField second_diff(const Mesh& mesh, const FaceField& u);

/// Adjoint of second_diff with respect to the P_M and V_M inner products,
/// gathered over B1(t) and B2(t).
FaceField second_diff_adjoint(const Mesh& mesh, const LineField& p);

/// Piecewise-constant Laplacian, equal to divergence(gradient(u)).
FaceField laplace(const Mesh& mesh, const FaceField& u);

// Assembled single-channel counterparts of the stencils above. They act on a
// column of per-element values and agree with the matrix-free versions.
SparseMatrix gradient_matrix(const Mesh& mesh);
SparseMatrix divergence_matrix(const Mesh& mesh);
SparseMatrix second_diff_matrix(const Mesh& mesh);
SparseMatrix second_diff_adjoint_matrix(const Mesh& mesh);
SparseMatrix laplace_matrix(const Mesh& mesh);

enum class RegularizerKind {
  kHighOrder,                  // ho: sum_l |[[u]]_l| len(l), scalar field
  kVectorHighOrder,            // vho: sum_l |[[u]]_l|_2 len(l)
  kLaplacian,                  // lap: sum_t |lap u|_t s_t, scalar field
  kVectorLaplacian,            // vlap: sum_t |lap u|_t|_2 s_t
  kWeightedVectorHighOrder,    // vhow: per-line weights
  kWeightedVectorLaplacian,    // vlapw: per-face weights
};

/// Weighted kinds take one weight per line (vhow) or per face (vlapw) and use
/// unit weights when none are given. Unweighted kinds reject weights.
/// Throws kWeightShapeMismatch or kChannelMismatch.
double regularizer_value(const Mesh& mesh, RegularizerKind kind, const FaceField& field,
                         std::optional<std::span<const double>> weights = std::nullopt);

}  // namespace homd
