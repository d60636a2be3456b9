#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace roughavg {

/// Tags separating the random streams consumed by one replica.
enum class StreamTag : std::uint64_t {
    fbm = 0x66626dULL,
    bm = 0x626dULL,
    frozen = 0x66727aULL,
    fbar = 0x666272ULL,
    probe = 0x707262ULL,
    replica = 0x72706cULL,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent stream key from a master seed and an ordered list of tags,
/// so (master, eps index, replica index, tag) maps to a stream without coordination.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) noexcept;

inline std::uint64_t tag(StreamTag t) noexcept { return static_cast<std::uint64_t>(t); }

using Engine = std::mt19937_64;

/// Engine seeded from the derived stream key.
Engine make_engine(std::uint64_t master, std::initializer_list<std::uint64_t> tags);

} // namespace roughavg
