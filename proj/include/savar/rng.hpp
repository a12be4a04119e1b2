#pragma once

#include <cstdint>
#include <random>

namespace savar {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; maps (master, stream) to well-separated seeds so
/// replications can be drawn in any order and still reproduce.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream = 0) {
    return Rng(derive_seed(master, stream));
}

}  // namespace savar
