#pragma once

#include <cstdint>
#include <random>

namespace rss {

// The engine output is fixed by the standard; the distributions are not, so
// draws go through these helpers to stay identical across toolchains.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) { return rng() % n; }

inline bool fair_coin(Rng& rng) { return (rng() >> 63) != 0; }

// Independent stream for (seed, tag) pairs.
inline Rng make_rng(std::uint64_t seed, std::uint64_t tag = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return Rng(seq);
}

}  // namespace rss
