#include "homd/metrics.hpp"

#include "homd/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace homd {

namespace {

struct Box {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void grow(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void grow(const Box& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  double squared_distance(const Vec3& p) const {
    const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
    return d.squaredNorm();
  }
};

// Median-split hierarchy, leaves hold up to kLeafSize triangles.
class TriangleTree {
 public:
  explicit TriangleTree(const Mesh& mesh) : mesh_(mesh), order_(mesh.num_faces()) {
    std::iota(order_.begin(), order_.end(), 0);
    if (!order_.empty()) build(0, static_cast<int>(order_.size()));
  }

  double squared_distance(const Vec3& p) const {
    double best = std::numeric_limits<double>::infinity();
    if (!nodes_.empty()) visit(0, p, best);
    return best;
  }

 private:
  static constexpr int kLeafSize = 4;

  struct Node {
    Box box;
    int begin = 0, end = 0;
    int left = -1, right = -1;
  };

  Vec3 corner(int t, int j) const { return mesh_.vertex(mesh_.triangle(t)[j]); }

  int build(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    Box box, centers;
    for (int i = begin; i < end; ++i) {
      for (int j = 0; j < 3; ++j) box.grow(corner(order_[i], j));
      centers.grow(mesh_.barycenter(order_[i]));
    }
    nodes_[id].box = box;
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    if (end - begin <= kLeafSize) return id;

    int axis = 0;
    (centers.hi - centers.lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                       return mesh_.barycenter(a)[axis] < mesh_.barycenter(b)[axis];
                     });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void visit(int id, const Vec3& p, double& best) const {
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int t = order_[i];
        const double d = (closest_point_on_triangle(p, corner(t, 0), corner(t, 1), corner(t, 2)) - p)
                             .squaredNorm();
        best = std::min(best, d);
      }
      return;
    }
    double dl = nodes_[node.left].box.squared_distance(p);
    double dr = nodes_[node.right].box.squared_distance(p);
    int first = node.left, second = node.right;
    if (dr < dl) {
      std::swap(first, second);
      std::swap(dl, dr);
    }
    if (dl <= best) visit(first, p, best);
    if (dr <= best) visit(second, p, best);
  }

  const Mesh& mesh_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace

double msae(const FaceField& result, const FaceField& clean) {
  if (result.size() != clean.size()) {
    throw Error(ErrorCode::kCountMismatch, std::to_string(result.size()) + " vs " +
                                               std::to_string(clean.size()) + " faces");
  }
  if (result.channels() != 3 || clean.channels() != 3) {
    throw Error(ErrorCode::kChannelMismatch, "normal fields must have 3 channels");
  }
  if (result.size() == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index t = 0; t < result.size(); ++t) {
    // atan2 stays accurate for small angles, where acos of the dot loses half
    // the digits, and gives exactly zero for identical normals.
    const Vec3 a = result.values.row(t).transpose();
    const Vec3 b = clean.values.row(t).transpose();
    const double angle = std::atan2(a.cross(b).norm(), a.dot(b));
    sum += angle * angle;
  }
  return sum / static_cast<double>(result.size());
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  return (closest_point_on_triangle(p, a, b, c) - p).norm();
}

double e_v2(const Mesh& result, const Mesh& clean, DistanceQuery query) {
  if (clean.num_faces() == 0) throw Error(ErrorCode::kInvalidArgument, "clean mesh is empty");
  const int n = result.num_vertices();
  std::vector<double> squared(n);
  if (query == DistanceQuery::kAabbTree) {
    const TriangleTree tree(clean);
#pragma omp parallel for schedule(dynamic, 64)
    for (int i = 0; i < n; ++i) squared[i] = tree.squared_distance(result.vertex(i));
  } else {
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < n; ++i) {
      const Vec3 p = result.vertex(i);
      double best = std::numeric_limits<double>::infinity();
      for (const Triangle& t : clean.triangles()) {
        const Vec3 q =
            closest_point_on_triangle(p, clean.vertex(t[0]), clean.vertex(t[1]), clean.vertex(t[2]));
        best = std::min(best, (q - p).squaredNorm());
      }
      squared[i] = best;
    }
  }

  double weighted = 0.0;
  for (int i = 0; i < n; ++i) {
    double area = 0.0;
    for (int t : result.vertex_faces(i)) area += result.face_area(t);
    weighted += area * squared[i];
  }
  const double total = result.total_area();
  if (total <= 0.0) return 0.0;
  return std::sqrt(weighted / (3.0 * total));
}

QualityMetrics quality_metrics(const Mesh& mesh) {
  if (mesh.num_faces() == 0) throw Error(ErrorCode::kInvalidArgument, "mesh has no faces");
  const auto areas = mesh.face_areas();
  const auto [lo, hi] = std::minmax_element(areas.begin(), areas.end());
  QualityMetrics q;
  q.d_global = *lo / *hi;
  q.d_local = std::numeric_limits<double>::infinity();
  for (int t = 0; t < mesh.num_faces(); ++t) {
    double shortest = std::numeric_limits<double>::infinity(), longest = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double len = mesh.edge_length(mesh.face_edge(t, j));
      shortest = std::min(shortest, len);
      longest = std::max(longest, len);
    }
    q.d_local = std::min(q.d_local, shortest / longest);
  }
  return q;
}

}  // namespace homd
