#pragma once

#include <cstdint>
#include <random>

namespace jd {

using Engine = std::mt19937_64;

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of item `index` of a stream rooted at `master`:
///   split(master, i) = mix64(master + (i + 1) * 0x9E3779B97F4A7C15).
/// Depends only on (master, index), never on scheduling.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master + (index + 1) * kGoldenGamma);
}

/// Independent per-path substreams. The killing threshold uses `main` (its
/// first draw), Brownian increments use `brownian`, jump arrivals and marks use
/// `jumps`. Keeping them apart couples runs at different step sizes.
struct PathStreams {
  explicit PathStreams(std::uint64_t path_seed)
      : main(split_seed(path_seed, 0)),
        brownian(split_seed(path_seed, 1)),
        jumps(split_seed(path_seed, 2)) {}

  Engine main;
  Engine brownian;
  Engine jumps;
};

}  // namespace jd
