#pragma once

#include <cstdint>
#include <random>

namespace spg {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stable child seed: seed_child = mix64(mix64(master) ^ mix64(index + 1)).
// Used for every master -> trial -> stage split so that a trial can be
// replayed from (master, index) alone.
constexpr std::uint64_t split_seed(std::uint64_t master,
                                   std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index + 1));
}

inline Rng make_rng(std::uint64_t seed) { return Rng{mix64(seed)}; }

}  // namespace spg
