#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace qha {

// Counter-based random stream: every draw is a pure function of
// (seed, stream, counter), so parallel and serial sweeps over samples
// produce identical numbers and any draw can be replayed in isolation.
namespace rng {

inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash3(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  std::uint64_t h = mix(seed ^ 0x8cb92ba72f3d8dd7ULL);
  h = mix(h ^ stream);
  h = mix(h ^ counter);
  return h;
}

// Uniform in (0, 1); never returns 0 so it is safe under log().
inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t bits = hash3(seed, stream, counter);
  return (double(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two decorrelated uniforms.
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const double u1 = uniform(seed, stream, 2 * counter);
  const double u2 = uniform(seed, stream, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Uniform integer in [0, n).
inline std::uint64_t uniform_index(std::uint64_t seed, std::uint64_t stream,
                                   std::uint64_t counter, std::uint64_t n) {
  return hash3(seed, stream, counter) % n;
}

}  // namespace rng
}  // namespace qha
