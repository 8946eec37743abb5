#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gridcurio {

// All randomness goes through mt19937_64 plus the helpers below, which are
// written out so that streams do not depend on the standard library's
// distribution implementations.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seeds(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (b + 0x632be59bd9b4e019ULL));
}

/// Uniform integer in [lo, hi] (inclusive), rejection sampled.
inline int uniform_int(Rng& rng, int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return lo + static_cast<int>(draw % span);
}

/// Uniform double in [0, 1).
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline double standard_normal(Rng& rng) {
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

template <typename Container>
void shuffle(Rng& rng, Container& items) {
  for (int i = static_cast<int>(items.size()) - 1; i > 0; --i) {
    const int j = uniform_int(rng, 0, i);
    std::swap(items[i], items[j]);
  }
}

}  // namespace gridcurio
