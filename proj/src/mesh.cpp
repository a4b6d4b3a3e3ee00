#include "homd/mesh.hpp"

#include "homd/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>

namespace homd {

namespace {

// Relative threshold on |cross| / (longest edge)^2 below which a face is
// treated as having zero area.
constexpr double kDegenerateRatio = 1e-14;

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

void to_csr(const std::vector<std::vector<int>>& rows, std::vector<int>& offsets,
            std::vector<int>& values) {
  offsets.assign(rows.size() + 1, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    offsets[i + 1] = offsets[i] + static_cast<int>(rows[i].size());
  }
  values.clear();
  values.reserve(offsets.back());
  for (const auto& row : rows) values.insert(values.end(), row.begin(), row.end());
}

std::span<const int> csr_row(const std::vector<int>& offsets, const std::vector<int>& values,
                             int i) {
  return {values.data() + offsets[i], static_cast<std::size_t>(offsets[i + 1] - offsets[i])};
}

}  // namespace

FaceGeometry triangle_geometry(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 cross = (b - a).cross(c - a);
  const double norm = cross.norm();
  const double longest =
      std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
  if (!std::isfinite(norm) || !(norm > kDegenerateRatio * longest)) {
    throw Error(ErrorCode::kDegenerateTriangle, "triangle has zero area");
  }
  FaceGeometry g;
  g.area = 0.5 * norm;
  g.normal = cross / norm;
  g.barycenter = (a + b + c) / 3.0;
  return g;
}

Mesh::Mesh() : topology_(std::make_shared<Topology>()), vertices_(0, 3) {}

Mesh::Mesh(Positions vertices, std::vector<Triangle> triangles) : vertices_(std::move(vertices)) {
  auto topo = std::make_shared<Topology>();
  const int nv = static_cast<int>(vertices_.rows());
  const int nf = static_cast<int>(triangles.size());

  for (int t = 0; t < nf; ++t) {
    const Triangle& tri = triangles[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) {
        throw Error(ErrorCode::kIndexOutOfRange, "face " + std::to_string(t) +
                                                     " references vertex " + std::to_string(v));
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw Error(ErrorCode::kDegenerateTriangle,
                  "face " + std::to_string(t) + " repeats a vertex");
    }
  }
  topo->triangles = std::move(triangles);

  // Edges in order of first appearance, oriented low -> high vertex index.
  std::unordered_map<std::uint64_t, int> edge_ids;
  edge_ids.reserve(static_cast<std::size_t>(nf) * 2);
  topo->face_edges.resize(nf);
  topo->face_edge_signs.resize(nf);
  for (int t = 0; t < nf; ++t) {
    const Triangle& tri = topo->triangles[t];
    for (int j = 0; j < 3; ++j) {
      const int a = tri[j];
      const int b = tri[(j + 1) % 3];
      const auto [it, inserted] =
          edge_ids.try_emplace(edge_key(a, b), static_cast<int>(topo->edges.size()));
      const int e = it->second;
      if (inserted) {
        topo->edges.push_back({std::min(a, b), std::max(a, b)});
        topo->edge_faces.push_back({t, kNoFace});
      } else if (topo->edge_faces[e][1] == kNoFace) {
        topo->edge_faces[e][1] = t;
      } else {
        throw Error(ErrorCode::kNonManifoldEdge, "edge (" + std::to_string(a) + ", " +
                                                     std::to_string(b) +
                                                     ") has more than two faces");
      }
      topo->face_edges[t][j] = e;
      topo->face_edge_signs[t][j] = a < b ? 1 : -1;
    }
  }

  // Consistent orientation: the two faces of an interior edge traverse it in
  // opposite directions.
  auto local_sign = [&](int e, int t) {
    for (int j = 0; j < 3; ++j) {
      if (topo->face_edges[t][j] == e) return topo->face_edge_signs[t][j];
    }
    return 0;
  };
  for (int e = 0; e < static_cast<int>(topo->edges.size()); ++e) {
    const auto [f0, f1] = topo->edge_faces[e];
    if (f1 != kNoFace && local_sign(e, f0) * local_sign(e, f1) != -1) {
      throw Error(ErrorCode::kInconsistentOrientation,
                  "faces " + std::to_string(f0) + " and " + std::to_string(f1) +
                      " disagree on the orientation of their shared edge");
    }
  }

  auto across = [&](int e, int t) {
    const auto& f = topo->edge_faces[e];
    return f[0] == t ? f[1] : f[0];
  };

  topo->stencils.resize(static_cast<std::size_t>(3) * nf);
  std::vector<std::vector<int>> neighbors(nf);
  for (int t = 0; t < nf; ++t) {
    for (int j = 0; j < 3; ++j) {
      LineStencil s;
      s.plus = across(topo->face_edges[t][j], t);
      s.minus = across(topo->face_edges[t][(j + 2) % 3], t);
      topo->stencils[3 * t + j] = s;
      const int n = across(topo->face_edges[t][j], t);
      if (n != kNoFace) neighbors[t].push_back(n);
    }
  }
  to_csr(neighbors, topo->neighbor_offsets, topo->neighbors);

  std::vector<std::vector<int>> b2(nf);
  for (int l = 0; l < 3 * nf; ++l) {
    const LineStencil s = topo->stencils[l];
    if (!s.active()) continue;
    b2[s.plus].push_back(l);
    b2[s.minus].push_back(l);
  }
  to_csr(b2, topo->b2_offsets, topo->b2);

  std::vector<std::vector<int>> vfaces(nv);
  std::vector<std::vector<int>> vnbrs(nv);
  for (int t = 0; t < nf; ++t) {
    for (int v : topo->triangles[t]) vfaces[v].push_back(t);
  }
  for (const auto& e : topo->edges) {
    vnbrs[e[0]].push_back(e[1]);
    vnbrs[e[1]].push_back(e[0]);
  }
  for (auto& row : vnbrs) std::sort(row.begin(), row.end());
  to_csr(vfaces, topo->vertex_face_offsets, topo->vertex_face_list);
  to_csr(vnbrs, topo->vertex_neighbor_offsets, topo->vertex_neighbor_list);

  topology_ = std::move(topo);
  compute_geometry();
}

Mesh Mesh::with_vertices(Positions vertices) const {
  if (vertices.rows() != vertices_.rows()) {
    throw Error(ErrorCode::kMeshMismatch, "vertex count differs from the mesh");
  }
  Mesh out;
  out.topology_ = topology_;
  out.vertices_ = std::move(vertices);
  out.compute_geometry();
  return out;
}

void Mesh::compute_geometry() {
  const int nf = num_faces();
  face_area_.resize(nf);
  face_normal_.resize(nf);
  barycenter_.resize(nf);
  line_length_.resize(static_cast<std::size_t>(3) * nf);
  for (int t = 0; t < nf; ++t) {
    const Triangle& tri = topology_->triangles[t];
    FaceGeometry g;
    try {
      g = triangle_geometry(vertex(tri[0]), vertex(tri[1]), vertex(tri[2]));
    } catch (const Error&) {
      throw Error(ErrorCode::kDegenerateTriangle, "face " + std::to_string(t) + " has zero area");
    }
    face_area_[t] = g.area;
    face_normal_[t] = g.normal;
    barycenter_[t] = g.barycenter;
    for (int j = 0; j < 3; ++j) {
      line_length_[3 * t + j] = (g.barycenter - vertex(tri[j])).norm();
    }
  }
  edge_length_.resize(topology_->edges.size());
  for (std::size_t e = 0; e < topology_->edges.size(); ++e) {
    const auto& ed = topology_->edges[e];
    edge_length_[e] = (vertex(ed[0]) - vertex(ed[1])).norm();
  }
}

int Mesh::sign(int e, int t) const {
  for (int j = 0; j < 3; ++j) {
    if (topology_->face_edges[t][j] == e) return topology_->face_edge_signs[t][j];
  }
  return 0;
}

std::span<const int> Mesh::face_neighbors(int t) const {
  return csr_row(topology_->neighbor_offsets, topology_->neighbors, t);
}

std::span<const int> Mesh::b2_lines(int t) const {
  return csr_row(topology_->b2_offsets, topology_->b2, t);
}

std::span<const int> Mesh::vertex_faces(int v) const {
  return csr_row(topology_->vertex_face_offsets, topology_->vertex_face_list, v);
}

std::span<const int> Mesh::vertex_neighbors(int v) const {
  return csr_row(topology_->vertex_neighbor_offsets, topology_->vertex_neighbor_list, v);
}

double Mesh::total_area() const {
  return std::accumulate(face_area_.begin(), face_area_.end(), 0.0);
}

double Mesh::mean_edge_length() const {
  if (edge_length_.empty()) return 0.0;
  return std::accumulate(edge_length_.begin(), edge_length_.end(), 0.0) /
         static_cast<double>(edge_length_.size());
}

double Mesh::bounding_box_diagonal() const {
  if (vertices_.rows() == 0) return 0.0;
  return (vertices_.colwise().maxCoeff() - vertices_.colwise().minCoeff()).norm();
}

FaceGeometry face_geometry(const Mesh& mesh, int face) {
  if (face < 0 || face >= mesh.num_faces()) {
    throw Error(ErrorCode::kIndexOutOfRange, "face index " + std::to_string(face));
  }
  return {mesh.face_area(face), mesh.face_normal(face), mesh.barycenter(face)};
}

}  // namespace homd
