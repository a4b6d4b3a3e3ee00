#include "homd/noise.hpp"

#include "homd/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace homd {

namespace {

// Box-Muller on the raw engine output. std::normal_distribution is
// implementation-defined, this is not.
class StandardNormal {
 public:
  explicit StandardNormal(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  // Uniform on (0, 1] from the top 53 bits.
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

double noise_sigma(const Mesh& mesh, double level) {
  if (!(level >= 0.0) || !std::isfinite(level)) {
    throw Error(ErrorCode::kInvalidArgument, "noise level must be finite and >= 0");
  }
  return level * mesh.mean_edge_length();
}

Mesh add_gaussian_noise(const Mesh& mesh, double level, std::uint64_t seed) {
  const double sigma = noise_sigma(mesh, level);
  if (sigma == 0.0) return mesh;

  StandardNormal normal(seed);
  Positions v = mesh.vertices();
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    const double magnitude = sigma * normal();
    Vec3 direction;
    do {
      direction = Vec3(normal(), normal(), normal());
    } while (direction.squaredNorm() == 0.0);
    v.row(i) += magnitude * direction.normalized().transpose();
  }
  return mesh.with_vertices(std::move(v));
}

}  // namespace homd
