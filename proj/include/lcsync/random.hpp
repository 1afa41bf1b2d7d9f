#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lcsync {

/// Derives an independent stream seed for a named component:
/// splitmix64(seed XOR fnv1a64(tag)). Adding a new tag never perturbs
/// the streams of existing tags.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
/// Bit-identical on every platform, unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

}  // namespace lcsync
