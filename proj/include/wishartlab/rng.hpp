#pragma once

#include <cstdint>
#include <limits>

namespace wishartlab {

// Keyed substream RNG. Batch draws and path steps each get their own stream
// derived from (seed, domain, key...), so results are independent of how work
// is split across threads and increments can be replayed without storage.
//
// splitmix64 after Steele/Lea/Flood; passes the UniformRandomBitGenerator
// concept so std::<random> distributions can run on top of it.
struct SplitMix64 {
  using result_type = std::uint64_t;

  std::uint64_t state;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

// Avalanche finalizer used to combine stream keys.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
  z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
  return z ^ (z >> 33);
}

// Domain tags keep substreams from different operations disjoint even under
// identical (seed, key) pairs.
namespace rng_domain {
constexpr std::uint64_t sample = 0x5753414d504c4531ULL;
constexpr std::uint64_t euler = 0x57455545554c4552ULL;
constexpr std::uint64_t ou_squares = 0x574f555351554152ULL;
}  // namespace rng_domain

inline SplitMix64 substream(std::uint64_t seed, std::uint64_t domain,
                            std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t k = mix64(seed ^ domain);
  k = mix64(k ^ (a + 0x9e3779b97f4a7c15ULL));
  k = mix64(k ^ (b + 0x7f4a7c159e3779b9ULL));
  return SplitMix64{k};
}

}  // namespace wishartlab
