#pragma once

#include <cstdint>
#include <random>

namespace turbodpsk {

using Rng = std::mt19937_64;

// splitmix64 finaliser
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent generator for (root seed, index, stream). Frame workers use
/// this so results never depend on which thread ran which frame.
inline Rng derive_rng(std::uint64_t root, std::uint64_t index, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(root), static_cast<std::uint32_t>(root >> 32),
                      static_cast<std::uint32_t>(mix64(index)), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

}  // namespace turbodpsk
