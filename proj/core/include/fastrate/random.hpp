#pragma once

#include <cmath>
#include <cstdint>

namespace fastrate {

/// Counter-based random stream keyed by (seed, stream id).  Draw j of
/// stream s under seed q is a pure function of (q, s, j), so replicate
/// loops can run in any order (or in parallel) without changing results.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(mix(mix(seed + 0x9e3779b97f4a7c15ULL, stream_id), 0x2545f4914f6cdd1dULL)) {}

  std::uint64_t next_u64() { return mix(key_, ++counter_); }

  /// Uniform on [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Standard normal via Box-Muller; pairs are cached so one call
  /// consumes either two uniforms or none.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    // Guard against log(0).
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  // SplitMix64-style finalizer over key and counter.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fastrate
