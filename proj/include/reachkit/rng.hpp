#pragma once

#include <cmath>
#include <cstdint>

namespace reachkit {

/// Deterministic 64-bit generator (splitmix64). Stream construction is
/// counter-based: substream(seed, j, tag) yields streams that are stable
/// under growing particle counts, which the nested-prefix reproducibility
/// guarantees rely on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t scramble(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Independent stream keyed on (seed, index, tag).
  static Rng substream(std::uint64_t seed, std::uint64_t index, std::uint64_t tag) {
    std::uint64_t k = seed;
    k = scramble(k + 0x9e3779b97f4a7c15ULL * (index + 1));
    k = scramble(k + 0xd1b54a32d192ed03ULL * (tag + 1));
    return Rng(k);
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    return scramble(z);
  }

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  /// Standard normal via Box-Muller (two uniforms per draw, no cached state).
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    // Guard against log(0).
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Gamma(alpha, 1) via Marsaglia-Tsang, with the boost trick for alpha < 1.
  double gamma(double alpha) {
    if (alpha < 1.0) {
      double u = uniform01();
      if (u <= 0.0) u = 0x1.0p-53;
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform01();
      if (u <= 0.0) u = 0x1.0p-53;
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  /// Beta(a, b) on [0, 1] from two gamma draws.
  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    double s = x + y;
    return s > 0.0 ? x / s : 0.5;
  }

 private:
  std::uint64_t state_;
};

}  // namespace reachkit
