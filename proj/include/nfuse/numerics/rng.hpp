#pragma once

#include <cstdint>
#include <random>

namespace nfuse {

// splitmix64 step; used to derive independent seeds from (seed, stream ids)
// so per-subject / per-fold work is order- and thread-independent.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  return mix_seed(mix_seed(mix_seed(seed ^ 0xa076'1d64'78bd'642fULL) ^ a) ^ mix_seed(b ^ (c << 1)));
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                std::uint64_t c = 0) {
  return std::mt19937_64(derive_seed(seed, a, b, c));
}

}  // namespace nfuse
