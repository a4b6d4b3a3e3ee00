#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <memory>
#include <span>
#include <vector>

namespace homd {

using Vec3 = Eigen::Vector3d;
/// V x 3 vertex coordinates, one row per vertex.
using Positions = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
/// Vertex indices of a face in counterclockwise order.
using Triangle = std::array<int, 3>;

inline constexpr int kNoFace = -1;

struct FaceGeometry {
  double area = 0.0;
  Vec3 normal = Vec3::Zero();
  Vec3 barycenter = Vec3::Zero();
};

/// Area, unit normal and barycenter of the triangle (a, b, c).
/// Throws Error(kDegenerateTriangle) when the cross product vanishes.
FaceGeometry triangle_geometry(const Vec3& a, const Vec3& b, const Vec3& c);

/// Neighbours of triangle tau across the two edges that meet at the vertex of
/// line l = (tau, j). `plus` lies across the edge (t[j], t[j+1]), `minus`
/// across (t[j+2], t[j]). Either is kNoFace on the boundary.
struct LineStencil {
  int plus = kNoFace;
  int minus = kNoFace;

  bool active() const { return plus != kNoFace && minus != kNoFace; }
};

/// Immutable triangulated surface.
///
/// Edges are oriented from the smaller to the larger vertex index.
/// face_edge(t, j) is the edge joining vertices t[j] and t[(j+1)%3], and
/// sgn(e, t) = +1 iff that ordered pair matches the edge orientation.
/// Lines (barycenter to vertex) are indexed l = 3*t + j.
class Mesh {
 public:
  Mesh();

  /// Throws Error with kIndexOutOfRange, kDegenerateTriangle, kNonManifoldEdge
  /// or kInconsistentOrientation.
  Mesh(Positions vertices, std::vector<Triangle> triangles);

  /// Same connectivity, new coordinates. Metric data are recomputed.
  Mesh with_vertices(Positions vertices) const;

  int num_vertices() const { return static_cast<int>(vertices_.rows()); }
  int num_faces() const { return static_cast<int>(topology_->triangles.size()); }
  int num_edges() const { return static_cast<int>(topology_->edges.size()); }
  int num_lines() const { return 3 * num_faces(); }

  const Positions& vertices() const { return vertices_; }
  Vec3 vertex(int v) const { return vertices_.row(v).transpose(); }
  std::span<const Triangle> triangles() const { return topology_->triangles; }
  const Triangle& triangle(int t) const { return topology_->triangles[t]; }

  const std::array<int, 2>& edge(int e) const { return topology_->edges[e]; }
  const std::array<int, 2>& edge_faces(int e) const { return topology_->edge_faces[e]; }
  bool is_boundary_edge(int e) const { return topology_->edge_faces[e][1] == kNoFace; }
  int face_edge(int t, int j) const { return topology_->face_edges[t][j]; }
  int face_edge_sign(int t, int j) const { return topology_->face_edge_signs[t][j]; }
  /// sgn(e, t) for an edge incident to t; 0 when e is not an edge of t.
  int sign(int e, int t) const;

  LineStencil line_stencil(int t, int j) const { return topology_->stencils[3 * t + j]; }
  LineStencil line_stencil(int l) const { return topology_->stencils[l]; }
  bool line_active(int l) const { return topology_->stencils[l].active(); }

  /// D1(t): faces sharing an edge with t.
  std::span<const int> face_neighbors(int t) const;
  /// B2(t): ids of the lines of neighbouring faces whose stencil reaches t.
  /// A line appears once per stencil slot that refers to t.
  std::span<const int> b2_lines(int t) const;
  /// M1(v): faces incident to v.
  std::span<const int> vertex_faces(int v) const;
  /// N1(v): vertices adjacent to v.
  std::span<const int> vertex_neighbors(int v) const;

  double face_area(int t) const { return face_area_[t]; }
  const Vec3& face_normal(int t) const { return face_normal_[t]; }
  const Vec3& barycenter(int t) const { return barycenter_[t]; }
  double edge_length(int e) const { return edge_length_[e]; }
  double line_length(int l) const { return line_length_[l]; }
  double line_length(int t, int j) const { return line_length_[3 * t + j]; }

  std::span<const double> face_areas() const { return face_area_; }
  std::span<const double> edge_lengths() const { return edge_length_; }
  std::span<const double> line_lengths() const { return line_length_; }

  double total_area() const;
  double mean_edge_length() const;
  double bounding_box_diagonal() const;

 private:
  struct Topology {
    std::vector<Triangle> triangles;
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 2>> edge_faces;
    std::vector<std::array<int, 3>> face_edges;
    std::vector<std::array<int, 3>> face_edge_signs;
    std::vector<LineStencil> stencils;
    std::vector<int> neighbor_offsets, neighbors;
    std::vector<int> b2_offsets, b2;
    std::vector<int> vertex_face_offsets, vertex_face_list;
    std::vector<int> vertex_neighbor_offsets, vertex_neighbor_list;
  };

  void compute_geometry();

  std::shared_ptr<const Topology> topology_;
  Positions vertices_;
  std::vector<double> face_area_;
  std::vector<Vec3> face_normal_;
  std::vector<Vec3> barycenter_;
  std::vector<double> edge_length_;
  std::vector<double> line_length_;
};

FaceGeometry face_geometry(const Mesh& mesh, int face);

}  // namespace homd
