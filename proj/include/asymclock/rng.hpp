#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace asymclock {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Substream seed derivation: fold each path id into the master seed with
// mix64 hash-combine. Distinct paths give unrelated streams, so work items
// can be computed in any order (or in parallel) without changing results.
inline std::uint64_t substream_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t id : path) {
    h = mix64(h ^ (mix64(id) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
  }
  return h;
}

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  return Rng(substream_seed(seed, path));
}

inline double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// mean == 0 is the no-noise case and consumes no draws.
inline double exponential(Rng& rng, double mean) {
  if (mean == 0.0) return 0.0;
  return std::exponential_distribution<double>(1.0 / mean)(rng);
}

inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

}  // namespace asymclock
