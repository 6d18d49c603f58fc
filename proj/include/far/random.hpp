#pragma once

#include <cstdint>
#include <initializer_list>
#include <cmath>
#include <random>

namespace far {

using Rng = std::mt19937_64;

/// Independent stream keyed by a base seed and a path of indices, e.g.
/// (seed, iteration) or (seed, T, N, iteration). Identical keys give
/// identical streams regardless of which thread asks.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
  // splitmix64 finalizer over the key path.
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t state = mix(seed);
  for (std::uint64_t k : path) state = mix(state ^ mix(k + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(state), static_cast<std::uint32_t>(state >> 32),
                    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(path.size())};
  return Rng(seq);
}

/// Uniform double in [0,1) from the top 53 bits; unlike
/// std::uniform_real_distribution its output is fixed across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Standard normal via Marsaglia's polar method on uniform01.
inline double standard_normal(Rng& rng) {
  for (;;) {
    const double u = 2.0 * uniform01(rng) - 1.0;
    const double v = 2.0 * uniform01(rng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

}  // namespace far
