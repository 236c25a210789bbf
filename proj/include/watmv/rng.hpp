#pragma once

#include <cstdint>
#include <string_view>

namespace watmv {

// SplitMix64 (Steele/Lea/Flood constants). Every random draw in the toolchain
// comes from one of these streams, so runs are replayable from a single seed.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    uint32_t next_u32() { return static_cast<uint32_t>(next_u64()); }

    // Unbiased-enough for desk scale; bias <= bound/2^64.
    uint64_t next_below(uint64_t bound) { return next_u64() % bound; }

private:
    uint64_t state_;
};

// SplitMix64 finalizer as a standalone mixing function.
inline uint64_t mix64(uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Derives a stream seed from a parent seed and an index (fleet nodes,
// oracle inputs). mix_seed(s, n) = finalizer(s XOR n).
inline uint64_t mix_seed(uint64_t seed, uint64_t index) {
    return mix64(seed ^ index);
}

// FNV-1a, used to fold names into seed derivations.
inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace watmv
