#pragma once

#include "homd/fields.hpp"
#include "homd/mesh.hpp"

namespace homd {

/// Mean over faces of the squared angle, in radians^2, between two normal
/// fields. Throws Error(kCountMismatch) when the face counts differ.
double msae(const FaceField& result, const FaceField& clean);

/// Closest point of triangle (a, b, c) to p, by region classification.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

enum class DistanceQuery {
  kBruteForce,  // every clean triangle for every vertex
  kAabbTree,    // bounding-volume hierarchy over the clean triangles
};

/// Area-weighted RMS distance from the result vertices to the clean surface:
///   sqrt( sum_i (sum_{t in M1(i)} s_t) d_i^2 / (3 sum_t s_t) )
/// with s_t the result mesh's areas and d_i the distance to the nearest clean
/// triangle. Both query methods return the same value.
double e_v2(const Mesh& result, const Mesh& clean,
            DistanceQuery query = DistanceQuery::kBruteForce);

struct QualityMetrics {
  double d_global = 0.0;  // smallest / largest face area
  double d_local = 0.0;   // min over faces of shortest / longest edge
};

QualityMetrics quality_metrics(const Mesh& mesh);

}  // namespace homd
