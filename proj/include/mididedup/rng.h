/// @file
/// @brief Counter-based random stream used wherever reproducibility matters.
///
/// Draw i (i = 1, 2, ...) of the stream seeded with s is
/// splitmix64_mix(s + i * 0x9E3779B97F4A7C15). uniform() keeps the top 53
/// bits: (x >> 11) * 2^-53. uniform_int(lo, hi) is lo + floor(uniform() *
/// (hi - lo + 1)); bernoulli(p) is uniform() < p. Nothing here depends on
/// the platform's <random> implementation.

#pragma once

#include <cstdint>

namespace mididedup {

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Seed of the `index`-th child stream of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64_mix(seed + (index + 1) * kGoldenGamma);
}

class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

  constexpr std::uint64_t next_u64() { return splitmix64_mix(seed_ + (++counter_) * kGoldenGamma); }
  constexpr double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  constexpr int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform() * static_cast<double>(hi - lo + 1));
  }
  constexpr bool bernoulli(double p) { return uniform() < p; }
  constexpr std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace mididedup
