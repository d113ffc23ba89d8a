#pragma once

#include <cstdint>
#include <random>

namespace czsd {

// splitmix64 finalizer; used to derive independent substreams from one seed.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Substream keyed by (seed, tag, index). Disjoint keys give independent
// generators, so per-agent streams never interleave.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t index = 0) {
  return std::mt19937_64(mix64(mix64(mix64(seed) ^ tag) ^ index));
}

}  // namespace czsd
