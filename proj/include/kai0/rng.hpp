#pragma once

#include <cmath>
#include <cstdint>

namespace kai0 {

/// Counter-based pseudo-random generator. Draw i is a pure function of
/// (key, i), so independent streams can be split off and consumed in any
/// order without aliasing, and the sequence is identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kKeySalt)) {}

  std::uint64_t next_u64() {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    // Multiply-shift bound; bias is negligible for n << 2^64.
    const auto x = next_u64();
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(x) * n) >> 64);
  }

  /// Standard normal via Box-Muller. Two draws are consumed per call.
  double gaussian() {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double gaussian(double mean, double stddev) {
    return mean + stddev * gaussian();
  }

  /// Derives an independent stream. Children with distinct ids never collide
  /// with each other or with the parent, regardless of draw order.
  Rng split(std::uint64_t stream_id) const {
    Rng child(0);
    child.key_ = mix(mix(key_ ^ kSplitSalt) + stream_id * kGolden);
    child.counter_ = 0;
    return child;
  }

  std::uint64_t key() const { return key_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kKeySalt = 0x6B61693000000001ULL;
  static constexpr std::uint64_t kSplitSalt = 0x73706C6974732121ULL;
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace kai0
