#pragma once

#include "homd/mesh.hpp"

#include <Eigen/Core>

namespace homd {

/// Element-major storage: one row per element, one column per channel.
using Values = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FaceTag {};
struct EdgeTag {};
struct LineTag {};

/// Piecewise-constant data on the faces (FaceTag), edges (EdgeTag) or
/// barycenter-to-vertex lines (LineTag) of a mesh.
template <class Tag>
struct Field {
  Values values;

  Field() = default;
  explicit Field(Values v) : values(std::move(v)) {}
  Field(Eigen::Index rows, Eigen::Index channels) : values(Values::Zero(rows, channels)) {}

  Eigen::Index size() const { return values.rows(); }
  Eigen::Index channels() const { return values.cols(); }
};

/// V_M: one tuple per triangle.
using FaceField = Field<FaceTag>;
/// Q_M: one tuple per edge, the range of the gradient.
using EdgeField = Field<EdgeTag>;
/// P_M: one tuple per line, row 3*t + j for vertex slot j of triangle t.
using LineField = Field<LineTag>;

inline FaceField zero_face_field(const Mesh& mesh, Eigen::Index channels = 1) {
  return FaceField(mesh.num_faces(), channels);
}
inline EdgeField zero_edge_field(const Mesh& mesh, Eigen::Index channels = 1) {
  return EdgeField(mesh.num_edges(), channels);
}
inline LineField zero_line_field(const Mesh& mesh, Eigen::Index channels = 1) {
  return LineField(mesh.num_lines(), channels);
}

/// Unit face normals of the mesh as a 3-channel field.
FaceField face_normals(const Mesh& mesh);

}  // namespace homd
