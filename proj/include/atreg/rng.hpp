#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "atreg/linalg.hpp"

namespace atreg {

/// Seedable standard Gaussian stream used everywhere noise is drawn.
///
/// The generator is pinned for reproducibility: mt19937_64 produces the raw
/// 64-bit words, uniforms take the top 53 bits scaled by 2^-53, and normals
/// come from the Marsaglia polar transform (no trigonometric calls). The same
/// seed yields the same sequence on any IEEE-754 platform.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  Vector draw(std::size_t n) {
    Vector w(n);
    for (double& x : w) x = next();
    return w;
  }

 private:
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace atreg
