#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hyperfit::rng {

/// Seeded random stream with platform-independent output.
///
/// mt19937_64 has a fully specified output sequence, and all derived draws
/// below are built from raw 64-bit words rather than the standard library
/// distributions (whose sequences are implementation-defined). Two streams
/// constructed with the same seed therefore produce identical values on any
/// conforming compiler, which is what makes seeded runs byte-reproducible.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller. Consumes two uniforms per call.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

  bool chance(double p) { return uniform() < p; }

  /// Derives an independent child stream; consumes one draw from the parent.
  Stream fork(std::uint64_t salt) { return Stream(next_u64() ^ (salt * 0x9E3779B97F4A7C15ull)); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace hyperfit::rng
