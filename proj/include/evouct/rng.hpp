#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace evouct {

/// Random stream used everywhere in the library. Every stochastic operation
/// takes one explicitly so results are reproducible per seed.
using Rng = std::mt19937_64;

/// Uniform index in [0, n). n must be positive.
inline std::size_t pick_index(Rng& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(rng);
}

/// Uniform real in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// SplitMix64 finaliser. Used to derive independent run seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace evouct
