#pragma once

#include <cmath>
#include <cstdint>

namespace ssm {

/// Counter-based pseudo-random generator (SplitMix64, Steele/Lea/Flood 2014).
///
/// Output i depends only on (seed, i), so independent streams can be derived
/// by hashing rather than by jumping, and a generator state never leaks
/// between consumers. All draw procedures below (uniform, normal, bounded
/// int) are fixed by this header; instances regenerate bit-identically from
/// their seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  /// SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Deterministic sub-stream seed from (seed, a, b). Used to give every
  /// (cell, trial, purpose) its own generator.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b = 0) {
    std::uint64_t h = mix(seed + kGamma);
    h = mix(h ^ (a + kGamma));
    h = mix(h ^ (b + kGamma));
    return h;
  }

  std::uint64_t next_u64() { return mix(seed_ + (++counter_) * kGamma); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_open01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second variate of each pair is
  /// cached, so draws come in a fixed order.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  /// Uniform integer in [0, bound) by 128-bit multiply-shift.
  int uniform_int(int bound) {
    const auto wide = static_cast<unsigned __int128>(next_u64()) *
                      static_cast<unsigned __int128>(bound);
    return static_cast<int>(wide >> 64);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ssm
