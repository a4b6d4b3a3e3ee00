#include "homd/operators.hpp"

#include "homd/error.hpp"

#include <string>
#include <vector>

namespace homd {

namespace {

using Triplet = Eigen::Triplet<double>;

void require_rows(Eigen::Index rows, Eigen::Index expected, const char* what) {
  if (rows != expected) {
    throw Error(ErrorCode::kMeshMismatch, std::string(what) + " has " + std::to_string(rows) +
                                              " rows, mesh needs " + std::to_string(expected));
  }
}

double weighted_inner(const Values& a, const Values& b, std::span<const double> weights,
                      const char* what) {
  require_rows(a.rows(), static_cast<Eigen::Index>(weights.size()), what);
  require_rows(b.rows(), static_cast<Eigen::Index>(weights.size()), what);
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::kChannelMismatch, std::string(what) + " channel counts differ");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    sum += weights[i] * a.row(i).dot(b.row(i));
  }
  return sum;
}

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols,
                           const std::vector<Triplet>& triplets) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace

FaceField face_normals(const Mesh& mesh) {
  FaceField n(mesh.num_faces(), 3);
  for (int t = 0; t < mesh.num_faces(); ++t) n.values.row(t) = mesh.face_normal(t).transpose();
  return n;
}

double inner_product(const Mesh& mesh, const FaceField& a, const FaceField& b) {
  return weighted_inner(a.values, b.values, mesh.face_areas(), "face field");
}

double inner_product(const Mesh& mesh, const EdgeField& a, const EdgeField& b) {
  return weighted_inner(a.values, b.values, mesh.edge_lengths(), "edge field");
}

double inner_product(const Mesh& mesh, const LineField& a, const LineField& b) {
  return weighted_inner(a.values, b.values, mesh.line_lengths(), "line field");
}

EdgeField gradient(const Mesh& mesh, const FaceField& u) {
  require_rows(u.size(), mesh.num_faces(), "face field");
  EdgeField q(mesh.num_edges(), u.channels());
#pragma omp parallel for schedule(static)
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.is_boundary_edge(e)) continue;
    const auto [f0, f1] = mesh.edge_faces(e);
    q.values.row(e) = static_cast<double>(mesh.sign(e, f0)) * u.values.row(f0) +
                      static_cast<double>(mesh.sign(e, f1)) * u.values.row(f1);
  }
  return q;
}

FaceField divergence(const Mesh& mesh, const EdgeField& q) {
  require_rows(q.size(), mesh.num_edges(), "edge field");
  FaceField out(mesh.num_faces(), q.channels());
#pragma omp parallel for schedule(static)
  for (int t = 0; t < mesh.num_faces(); ++t) {
    for (int j = 0; j < 3; ++j) {
      const int e = mesh.face_edge(t, j);
      if (mesh.is_boundary_edge(e)) continue;
      out.values.row(t) -= (mesh.face_edge_sign(t, j) * mesh.edge_length(e)) * q.values.row(e);
    }
    out.values.row(t) /= mesh.face_area(t);
  }
  return out;
}

LineField second_diff(const Mesh& mesh, const FaceField& u) {
  require_rows(u.size(), mesh.num_faces(), "face field");
  LineField p(mesh.num_lines(), u.channels());
#pragma omp parallel for schedule(static)
  for (int l = 0; l < mesh.num_lines(); ++l) {
    const LineStencil s = mesh.line_stencil(l);
    if (!s.active()) continue;
    p.values.row(l) = u.values.row(s.plus) + u.values.row(s.minus) - 2.0 * u.values.row(l / 3);
  }
  return p;
}

FaceField second_diff_adjoint(const Mesh& mesh, const LineField& p) {
  require_rows(p.size(), mesh.num_lines(), "line field");
  FaceField out(mesh.num_faces(), p.channels());
#pragma omp parallel for schedule(static)
  for (int t = 0; t < mesh.num_faces(); ++t) {
    for (int l : mesh.b2_lines(t)) {
      out.values.row(t) += mesh.line_length(l) * p.values.row(l);
    }
    for (int j = 0; j < 3; ++j) {
      const int l = 3 * t + j;
      if (!mesh.line_active(l)) continue;
      out.values.row(t) -= 2.0 * mesh.line_length(l) * p.values.row(l);
    }
    out.values.row(t) /= mesh.face_area(t);
  }
  return out;
}

FaceField laplace(const Mesh& mesh, const FaceField& u) {
  require_rows(u.size(), mesh.num_faces(), "face field");
  FaceField out(mesh.num_faces(), u.channels());
#pragma omp parallel for schedule(static)
  for (int t = 0; t < mesh.num_faces(); ++t) {
    for (int j = 0; j < 3; ++j) {
      const int e = mesh.face_edge(t, j);
      if (mesh.is_boundary_edge(e)) continue;
      const auto& f = mesh.edge_faces(e);
      const int n = f[0] == t ? f[1] : f[0];
      out.values.row(t) -= mesh.edge_length(e) * (u.values.row(t) - u.values.row(n));
    }
    out.values.row(t) /= mesh.face_area(t);
  }
  return out;
}

SparseMatrix gradient_matrix(const Mesh& mesh) {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(2) * mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.is_boundary_edge(e)) continue;
    for (int f : mesh.edge_faces(e)) triplets.emplace_back(e, f, static_cast<double>(mesh.sign(e, f)));
  }
  return from_triplets(mesh.num_edges(), mesh.num_faces(), triplets);
}

SparseMatrix divergence_matrix(const Mesh& mesh) {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(3) * mesh.num_faces());
  for (int t = 0; t < mesh.num_faces(); ++t) {
    for (int j = 0; j < 3; ++j) {
      const int e = mesh.face_edge(t, j);
      if (mesh.is_boundary_edge(e)) continue;
      triplets.emplace_back(t, e,
                            -mesh.face_edge_sign(t, j) * mesh.edge_length(e) / mesh.face_area(t));
    }
  }
  return from_triplets(mesh.num_faces(), mesh.num_edges(), triplets);
}

SparseMatrix second_diff_matrix(const Mesh& mesh) {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(3) * mesh.num_lines());
  for (int l = 0; l < mesh.num_lines(); ++l) {
    const LineStencil s = mesh.line_stencil(l);
    if (!s.active()) continue;
    triplets.emplace_back(l, s.plus, 1.0);
    triplets.emplace_back(l, s.minus, 1.0);
    triplets.emplace_back(l, l / 3, -2.0);
  }
  return from_triplets(mesh.num_lines(), mesh.num_faces(), triplets);
}

SparseMatrix second_diff_adjoint_matrix(const Mesh& mesh) {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(9) * mesh.num_faces());
  for (int t = 0; t < mesh.num_faces(); ++t) {
    const double inv_area = 1.0 / mesh.face_area(t);
    for (int l : mesh.b2_lines(t)) triplets.emplace_back(t, l, mesh.line_length(l) * inv_area);
    for (int j = 0; j < 3; ++j) {
      const int l = 3 * t + j;
      if (mesh.line_active(l)) triplets.emplace_back(t, l, -2.0 * mesh.line_length(l) * inv_area);
    }
  }
  return from_triplets(mesh.num_faces(), mesh.num_lines(), triplets);
}

SparseMatrix laplace_matrix(const Mesh& mesh) {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(6) * mesh.num_faces());
  for (int t = 0; t < mesh.num_faces(); ++t) {
    const double inv_area = 1.0 / mesh.face_area(t);
    for (int j = 0; j < 3; ++j) {
      const int e = mesh.face_edge(t, j);
      if (mesh.is_boundary_edge(e)) continue;
      const auto& f = mesh.edge_faces(e);
      const int n = f[0] == t ? f[1] : f[0];
      const double w = mesh.edge_length(e) * inv_area;
      triplets.emplace_back(t, t, -w);
      triplets.emplace_back(t, n, w);
    }
  }
  return from_triplets(mesh.num_faces(), mesh.num_faces(), triplets);
}

double regularizer_value(const Mesh& mesh, RegularizerKind kind, const FaceField& field,
                         std::optional<std::span<const double>> weights) {
  const bool scalar = kind == RegularizerKind::kHighOrder || kind == RegularizerKind::kLaplacian;
  if (scalar && field.channels() != 1) {
    throw Error(ErrorCode::kChannelMismatch, "scalar regularizer needs a single-channel field");
  }
  const bool per_line = kind == RegularizerKind::kHighOrder ||
                        kind == RegularizerKind::kVectorHighOrder ||
                        kind == RegularizerKind::kWeightedVectorHighOrder;
  const bool weighted = kind == RegularizerKind::kWeightedVectorHighOrder ||
                        kind == RegularizerKind::kWeightedVectorLaplacian;
  const std::size_t count = per_line ? mesh.num_lines() : mesh.num_faces();
  if (weights && (!weighted || weights->size() != count)) {
    throw Error(ErrorCode::kWeightShapeMismatch,
                weighted ? "expected " + std::to_string(count) + " weights"
                         : "unweighted regularizer given weights");
  }

  const Values diff = per_line ? second_diff(mesh, field).values : laplace(mesh, field).values;
  const std::span<const double> measure = per_line ? mesh.line_lengths() : mesh.face_areas();
  double sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    if (w < 0.0) throw Error(ErrorCode::kWeightShapeMismatch, "negative weight");
    sum += w * diff.row(static_cast<Eigen::Index>(i)).norm() * measure[i];
  }
  return sum;
}

}  // namespace homd
