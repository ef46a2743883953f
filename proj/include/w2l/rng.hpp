#ifndef W2L_RNG_HPP
#define W2L_RNG_HPP

#include <cstdint>
#include <random>

namespace w2l {

using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) with 53 bits of resolution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Independent sub-stream seed for item `index` of a campaign seeded with `seed`
/// (splitmix64 finalizer over the pair).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace w2l

#endif  // W2L_RNG_HPP
