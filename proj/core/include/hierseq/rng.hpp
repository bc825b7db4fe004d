#pragma once

#include <cstdint>
#include <random>

namespace hierseq {

/// Portable deterministic randomness helpers. Engines are std::mt19937_64
/// (fully specified by the standard); doubles are built from the raw 64-bit
/// stream directly, because std::uniform_*_distribution is
/// implementation-defined and would break cross-toolchain reproducibility.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stream seed for (run seed, level, chunk, purpose tag); chunked pools use
/// one engine per chunk so results do not depend on thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t level, std::uint64_t chunk,
                                 std::uint64_t tag) {
    std::uint64_t h = splitmix64(seed ^ 0x517cc1b727220a95ULL);
    h = splitmix64(h ^ tag);
    h = splitmix64(h ^ level);
    h = splitmix64(h ^ chunk);
    return h;
}

/// Uniform double in [0, 1) with 53 significant bits.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Unbiased uniform integer in [0, n) by bitmask rejection.
inline std::uint64_t bounded_uint(std::mt19937_64& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t mask = ~0ULL >> __builtin_clzll((n - 1) | 1);
    for (;;) {
        std::uint64_t v = rng() & mask;
        if (v < n) return v;
    }
}

}  // namespace hierseq
