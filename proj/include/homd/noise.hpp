#pragma once

#include "homd/mesh.hpp"

#include <cstdint>

namespace homd {

/// Displaces every vertex by g * d with g ~ Normal(0, (level * mean edge)^2)
/// and d uniform on the unit sphere. Vertices are visited in index order with
/// a single mt19937_64 stream, so a seed reproduces the output bit for bit on
/// any platform. level = 0 returns the input unchanged.
Mesh add_gaussian_noise(const Mesh& mesh, double level, std::uint64_t seed);

/// The absolute standard deviation add_gaussian_noise applies.
double noise_sigma(const Mesh& mesh, double level);

}  // namespace homd
