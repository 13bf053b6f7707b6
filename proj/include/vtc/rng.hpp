// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace vtc::rng {

// Counter-based deterministic generator. Every draw is a pure function of
// (key, index), so results do not depend on draw order and identical seeds
// reproduce identical streams across runs.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2) + splitmix64(b)));
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix(mix(a, b), c);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    return mix(mix(a, b, c), d);
}

// Uniform double in [0, 1) from the top 53 bits of the mixed key.
inline double uniform01(std::uint64_t key, std::uint64_t index) {
    return static_cast<double>(mix(key, index) >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two counter draws. Index i consumes
// the (2i, 2i+1) uniform pair, keeping draws order-independent.
inline double standard_normal(std::uint64_t key, std::uint64_t index) {
    const double u1 = uniform01(key, 2 * index);
    const double u2 = uniform01(key, 2 * index + 1);
    // Guard u1 away from 0 so the log stays finite.
    const double r = std::sqrt(-2.0 * std::log(u1 + 0x1.0p-60));
    return r * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace vtc::rng
