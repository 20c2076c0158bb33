#pragma once

// Seeded random generation with a pinned algorithm so that every trace is
// reproducible bit-for-bit on any platform with IEEE doubles and a correctly
// rounded libm:
//   * state: xoshiro256** (Blackman & Vigna), 256-bit state
//   * seeding: the four state words are successive splitmix64 outputs of
//     seed ^ (stream * 0x9E3779B97F4A7C15), so (seed, stream) pairs give
//     independent-looking streams
//   * uniform doubles: top 53 bits of a draw, scaled into [0, 1)
//   * normals: Box–Muller, both values of a pair are used (cos first, then sin)

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "rkjl/linalg.hpp"

namespace rkjl {

class Rng {
public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {
    std::uint64_t sm = seed ^ (stream * 0x9E3779B97F4A7C15ULL);
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) noexcept {
    __uint128_t m = static_cast<__uint128_t>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<__uint128_t>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline RealVector gaussian_vector(Rng& rng, std::size_t len, double stddev) {
  if (len == 0) throw ParameterError("gaussian_vector: len must be >= 1");
  if (!(stddev >= 0.0)) throw ParameterError("gaussian_vector: stddev must be nonnegative");
  RealVector v(len);
  for (auto& e : v) e = stddev * rng.normal();
  return v;
}

/// Uniform point on the unit sphere in R^len.
inline RealVector sphere_uniform(Rng& rng, std::size_t len) {
  for (;;) {
    RealVector v = gaussian_vector(rng, len, 1.0);
    const double nrm = norm2(v);
    if (nrm == 0.0) continue;
    for (auto& e : v) e /= nrm;
    return v;
  }
}

}  // namespace rkjl
