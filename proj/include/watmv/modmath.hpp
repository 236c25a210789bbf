#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "watmv/rng.hpp"

namespace watmv {

// Multiplicative inverse mod 2^32 by Newton-Hensel lifting: x' = x(2 - a*x)
// doubles the number of correct low bits, and a*a == 1 (mod 8) seeds it.
inline uint32_t mod_inverse(uint32_t a) {
    if ((a & 1u) == 0) throw std::domain_error("not invertible: even value");
    uint32_t x = a;
    for (int i = 0; i < 5; ++i) x *= 2u - a * x;
    return x;
}

// Factors c into (a, b) with a odd and a*b == c (mod 2^32), never the
// degenerate pair (1, c). Turns one multiplication into two that wrap
// around, the overflow-based rewrite.
inline std::pair<uint32_t, uint32_t> split_mul_const(uint32_t c, SplitMix64& rng) {
    uint32_t a;
    do {
        a = rng.next_u32() | 1u;
    } while (a == 1u);
    uint32_t b = c * mod_inverse(a);
    return {a, b};
}

// Splits c into n parts whose sum is c mod 2^32.
inline std::vector<uint32_t> split_add_const(uint32_t c, size_t n, SplitMix64& rng) {
    if (n < 2) throw std::invalid_argument("split_add_const needs n >= 2");
    std::vector<uint32_t> parts(n);
    uint32_t sum = 0;
    for (size_t i = 0; i + 1 < n; ++i) {
        parts[i] = rng.next_u32();
        sum += parts[i];
    }
    parts[n - 1] = c - sum;
    return parts;
}

} // namespace watmv
