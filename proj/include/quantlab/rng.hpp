#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "quantlab/numerics.hpp"

namespace quantlab {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ULL;

/// Counter-based SplitMix64 stream.
///
/// The stream is identified by a 64-bit key derived from (seed, stream id):
///   key = mix64(seed) ^ mix64(stream * kGolden64 + 0xD1B54A32D192ED03)
/// and its i-th word (i = 0, 1, ...) is
///   word(i) = mix64(key + (i + 1) * kGolden64).
/// Any word is addressable without generating its predecessors, so streams
/// split across workers reproduce the same values on every platform.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(mix64(seed) ^ mix64(stream * kGolden64 + 0xD1B54A32D192ED03ULL)) {}

  constexpr std::uint64_t at(std::uint64_t index) const noexcept {
    return mix64(key_ + (index + 1) * kGolden64);
  }

  constexpr std::uint64_t next() noexcept { return at(counter_++); }
  constexpr std::uint64_t operator()() noexcept { return next(); }
  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return std::numeric_limits<std::uint64_t>::max(); }

  /// Uniform double in [0,1) from the top 53 bits of one word.
  double uniform() noexcept { return std::ldexp(static_cast<double>(next() >> 11), -53); }

  /// Uniform fixed-point value from two words (high word first).
  UnitPoint unit_point() noexcept {
    const u128 hi = next();
    const u128 lo = next();
    return UnitPoint::from_raw((hi << 64) | lo);
  }

  std::uint64_t position() const noexcept { return counter_; }
  void seek(std::uint64_t index) noexcept { counter_ = index; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Seed number `index` of the family rooted at `master`. Adding more seeds to
/// a family never changes earlier members.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) + (index + 1) * kGolden64);
}

/// Stream ids used by the generators, so different uses of one seed never
/// share words.
namespace streams {
inline constexpr std::uint64_t kIidUniform = 0;
inline constexpr std::uint64_t kIidDensity = 1;
inline constexpr std::uint64_t kTheta = 2;
inline constexpr std::uint64_t kLloydInit = 3;
}  // namespace streams

}  // namespace quantlab
