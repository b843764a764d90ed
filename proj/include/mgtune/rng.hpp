#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mgtune {

/// SplitMix64 finalizer. Used to turn structured seed integers (run id,
/// replicate index, stream index) into well-mixed engine seeds.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Uniform draw on (0,1). Built from the top 53 bits of the engine output so
/// the double sequence is identical on every platform, unlike
/// std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
  const std::uint64_t bits = rng() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1p-53;
}

/// Uniform draw on the open interval (-1,1).
inline double uniform_pm1(std::mt19937_64& rng) {
  return 2.0 * uniform01(rng) - 1.0;
}

/// Standard normal draw via Box-Muller. Consumes exactly two uniforms, so
/// sequences stay reproducible across platforms.
inline double normal01(std::mt19937_64& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace mgtune
