// covalign/rng.hpp
//
// Seeded random streams. Every stochastic routine takes an Rng& explicitly;
// independent trials derive their own stream with mix_seed so results do not
// depend on scheduling.

#pragma once

#include <cstdint>
#include <random>

namespace covalign {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stream seed for (base, a, b), e.g. (base_seed, grid_index, replicate).
/// Each component passes through the finalizer before being folded in, so
/// nearby tuples land far apart.
constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ splitmix64(a + 0x632BE59BD9B4E019ULL));
  h = splitmix64(h ^ splitmix64(b + 0x85157AF5ULL));
  return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace covalign
