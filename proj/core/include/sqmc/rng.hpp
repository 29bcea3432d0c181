#pragma once

#include <cstdint>

namespace sqmc {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a child key from a parent key and a label; order matters.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t label) {
  return mix64(parent ^ mix64(label + 0x632be59bd9b4e019ULL));
}

/// Purpose tags for counter-based streams.
enum class Stream : std::uint64_t {
  initial = 1,
  resample = 2,
  propagate = 3,
  scramble = 4,
  replication = 5,
  simulate = 6,
};

/// Counter-based generator: the k-th draw is a pure function of (key, k), so
/// streams keyed by (seed, t, n, purpose) can be consumed in any order.
class CounterRng {
 public:
  constexpr explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr CounterRng keyed(std::uint64_t seed, Stream purpose, std::uint64_t t,
                                    std::uint64_t n = 0) {
    return CounterRng(
        derive_key(derive_key(derive_key(seed, static_cast<std::uint64_t>(purpose)), t), n));
  }

  constexpr std::uint64_t bits(std::uint64_t k) const {
    return mix64(key_ + 0x9e3779b97f4a7c15ULL * (k + 1));
  }

  /// Uniform on the open interval (0, 1), 53 bits.
  constexpr double uniform(std::uint64_t k) const {
    return (static_cast<double>(bits(k) >> 11) + 0.5) * 0x1p-53;
  }

  /// Sequential interface.
  std::uint64_t next_bits() { return bits(counter_++); }
  double next_uniform() { return uniform(counter_++); }

  constexpr std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sqmc
