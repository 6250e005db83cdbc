#pragma once

#include <cstdint>

namespace tailcp {

/// SplitMix64 finaliser. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives the seed of stream `index` from `master`. Used for replication
/// seeds, the volatility/innovation sub-streams and per-path Brownian
/// streams alike: seed = splitmix64(splitmix64(master) ^ (index * 0xD1B54A32D192ED03)).
constexpr std::uint64_t mix64(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ (index * 0xD1B54A32D192ED03ULL));
}

/// Counter-based uniform stream: draw i is a pure function of (key, i), so
/// distinct keys give non-overlapping streams regardless of scheduling.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_bits() noexcept {
    return splitmix64(key_ + counter_++ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on the open interval (0, 1).
  double next_uniform() noexcept {
    return (static_cast<double>(next_bits() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the inverse CDF.
  double next_normal() noexcept;

  std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace tailcp
