#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace blindcd {

// mt19937_64 output is fixed by the standard, so streams are reproducible
// across platforms as long as we avoid the std distributions.
using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Substream seed for the node `path` below `master`. Stable across runs,
/// thread counts and platforms; used for every per-draw / per-trial seed.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::uint64_t seed_key(double value) { return std::bit_cast<std::uint64_t>(value); }

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1].
inline double uniform01_open_low(Engine& eng) { return 1.0 - uniform01(eng); }

inline double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

/// Uniform integer in [0, bound) by rejection (no modulo bias).
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % bound;
}

/// Number of failures before the first success of a Bernoulli(p) sequence.
/// Requires 0 < p < 1.
inline std::uint64_t geometric_skip(Engine& eng, double log1m_p) {
  const double u = uniform01_open_low(eng);
  const double skip = std::floor(std::log(u) / log1m_p);
  if (!(skip < 9.0e18)) return ~std::uint64_t{0} >> 1;
  return static_cast<std::uint64_t>(skip);
}

}  // namespace blindcd
