#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace adaptopt {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream key from a parent key and a label.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t label) noexcept {
  return mix64(parent ^ mix64(label + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: the i-th output is a pure function of (key, i).
///
/// Two generators built from the same key produce the same stream on every
/// platform, which is what makes harness reports byte-reproducible and lets
/// trials run in any order. Distribution sampling is done here rather than
/// through <random> distributions, whose algorithms are implementation-defined.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(mix64(key)) {}
  constexpr CounterRng(std::uint64_t key, std::uint64_t stream) noexcept
      : key_(derive_key(key, stream)) {}

  constexpr std::uint64_t next_u64() noexcept {
    return mix64(key_ + 0xd1b54a32d192ed03ULL * ++counter_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// +1 or -1 with equal probability.
  double rademacher() noexcept { return (next_u64() >> 63) != 0 ? 1.0 : -1.0; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept {
    // Multiply-shift; bias is below 2^-64 * n, irrelevant at our sizes.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller (one output per call, the sine branch is dropped).
  double normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace adaptopt
