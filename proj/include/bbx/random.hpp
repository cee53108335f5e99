#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "bbx/linalg.hpp"

namespace bbx {

/// Seeded generator with a fully specified algorithm: MT19937-64 words,
/// 53-bit uniforms and Box-Muller normals (pairs, second value cached).
/// std::normal_distribution is avoided because its algorithm is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    cached_ = true;
    return r * std::cos(phi);
  }

  double normal(double sigma) { return sigma * normal(); }

  Vec3 normal3(double sigma) {
    const double x = normal(sigma);
    const double y = normal(sigma);
    const double z = normal(sigma);
    return Vec3(x, y, z);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool cached_ = false;
};

}  // namespace bbx
