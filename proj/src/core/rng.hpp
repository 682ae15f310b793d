// Seed derivation. Every random stream in a run is keyed off the base seed
// through these stateless mixers, so results never depend on scheduling.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bbq {

/// Per-shot and per-stage generator. mt19937_64 output is fixed by the standard.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t derive_point_seed(std::uint64_t base_seed, std::uint64_t point_id)
{
    return mix64(mix64(base_seed) ^ point_id);
}

constexpr std::uint64_t derive_shot_seed(std::uint64_t base_seed, std::uint64_t point_id, std::uint64_t shot_index)
{
    return mix64(derive_point_seed(base_seed, point_id) ^ mix64(shot_index));
}

/// Seed for a named analysis stage, e.g. ("pstar-boot", "bb-12x6").
constexpr std::uint64_t derive_stage_seed(std::uint64_t base_seed, std::string_view tag, std::string_view key)
{
    return mix64(mix64(base_seed ^ fnv1a64(tag)) ^ fnv1a64(key));
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace bbq
