#pragma once

#include <cstdint>

namespace nnrange {

/// Counter-based generator: draw i of stream s under seed k is
/// splitmix64_mix(key + (i + 1) * golden) with key = splitmix64_mix(k + (s + 1) * golden).
///
/// Every draw is a pure function of (seed, stream, index), so streams can be
/// split across threads without coordination. With key 0 the draws reproduce
/// the reference SplitMix64 sequence seeded with 0
/// (0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F, ...).
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
    return mix(seed + (stream + 1) * kGolden);
  }

  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(stream_key(seed, stream)) {}
  static constexpr CounterRng from_key(std::uint64_t key) { return CounterRng(key); }

  constexpr std::uint64_t at(std::uint64_t index) const { return mix(key_ + (index + 1) * kGolden); }
  constexpr std::uint64_t next() { return at(counter_++); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t counter() const { return counter_; }

 private:
  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace nnrange
