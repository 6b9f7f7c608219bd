#pragma once

#include <cstdint>
#include <random>

namespace kolloc {

/// Splitmix64 finalizer; decorrelates seed/stream pairs so independent
/// sampling stages (interior vs boundary, path j vs path j+1) never share
/// an engine state.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_engine(uint64_t seed, uint64_t stream) {
  return std::mt19937_64(mix_seed(seed, stream));
}

}  // namespace kolloc
