#pragma once

#include <cstdint>
#include <random>

namespace talearn {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for sub-stream `index` of `seed`. Stream i does not depend on
/// how many other streams are drawn.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x51ed270b27ULL)));
}

/// Uniform in [0, 1) with 53 random bits; identical across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform in (0, 1].
inline double positive_unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

}  // namespace talearn
