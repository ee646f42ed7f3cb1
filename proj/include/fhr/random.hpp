#pragma once

#include <cstdint>
#include <random>

namespace fhr {

// Portable uniform double in [0, 1) from the top 53 bits of the engine, so
// seeded results do not depend on the standard library's distributions.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Seed for work unit `index` derived from a base seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return seed ^ index;
}

}  // namespace fhr
