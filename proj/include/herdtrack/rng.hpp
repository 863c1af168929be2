#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace herdtrack {

// The distributions in <random> are implementation-defined; only the engines
// are pinned by the standard. Everything below derives values from the raw
// engine output so datasets reproduce across standard libraries.

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for a (global seed, a, b) triple, e.g. (seed, frame_id, instance_id).
constexpr std::uint64_t hash64(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
  return mix64(mix64(mix64(seed) ^ a) ^ b);
}

using Engine = std::mt19937_64;

/// Uniform double in [0,1) from the top 53 bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection; n > 0.
inline std::uint64_t uniform_below(Engine& eng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = eng();
  while (x >= limit) x = eng();
  return x % n;
}

/// Pair of independent standard normals (Box-Muller).
struct NormalPair {
  double first;
  double second;
};

inline NormalPair standard_normal_pair(Engine& eng) {
  double u1 = uniform01(eng);
  while (u1 <= 0.0) u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  constexpr double two_pi = 6.283185307179586476925286766559;
  return {r * std::cos(two_pi * u2), r * std::sin(two_pi * u2)};
}

}  // namespace herdtrack
