#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace got {

/// The single generator used by every simulation: 64-bit Mersenne Twister.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for replication `index` of an experiment seeded with `master`:
/// splitmix64(master ^ splitmix64(index + 1)).
constexpr std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index + 1));
}

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// True with probability p (one draw, even when p is 0 or 1).
inline bool bernoulli(double p, Rng& rng) { return uniform01(rng) < p; }

/// Index drawn from a discrete distribution by inverse CDF (one draw).
/// Falls back to the last positive entry to absorb rounding in the row sum.
inline std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    acc += probs[i];
    if (u < acc) return i;
  }
  return last_positive;
}

}  // namespace got
