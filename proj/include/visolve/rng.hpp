// Reproducible randomness. All stochastic pieces of the library draw from
// std::mt19937_64 through the helpers below instead of <random>
// distributions, whose output is implementation-defined. Given the same
// seed, index streams, shuffles and noise are identical on every platform.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace visolve::rng {

using Engine = std::mt19937_64;

// Unbiased draw from {0, ..., bound-1} by rejection.
inline std::uint64_t uniform_below(Engine& eng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t draw;
  do {
    draw = eng();
  } while (draw >= limit);
  return draw % bound;
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller; two engine draws per sample.
inline double gaussian(Engine& eng) {
  const double u1 = 1.0 - uniform01(eng);  // (0, 1]
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace visolve::rng
