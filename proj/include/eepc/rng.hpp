#pragma once

#include <cmath>
#include <cstdint>
#include <random>

// Seed derivation and sampling transforms. The transforms are written out
// explicitly so that streams depend only on the mt19937_64 bit stream, which
// the standard pins down exactly.

namespace eepc {

// splitmix64 finalizer; chains to derive well-separated substream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) { return mix64(mix64(a) ^ b); }

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(mix64(a, b) ^ c);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    return mix64(mix64(a, b, c) ^ d);
}

// Stream tags; one per random purpose so draws never alias across purposes.
namespace stream {
inline constexpr std::uint64_t code = 0x636f6465ull;
inline constexpr std::uint64_t gains = 0x6761696eull;
inline constexpr std::uint64_t delays = 0x646c6179ull;
inline constexpr std::uint64_t offsets = 0x6f666673ull;
}  // namespace stream

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64{seed}; }

// Uniform in [0, 1): top 53 bits of one draw.
inline double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// Uniform in (0, 1]; safe as a log() argument.
inline double uniform01_pos(std::mt19937_64& g) {
    return static_cast<double>((g() >> 11) + 1) * 0x1.0p-53;
}

// Uniform integer in {0, ..., bound-1}; bound is small here (chip counts), so
// the 2^-53 rounding bias is irrelevant.
inline int uniform_int(std::mt19937_64& g, int bound) {
    return static_cast<int>(uniform01(g) * static_cast<double>(bound));
}

inline double sample_exponential(std::mt19937_64& g, double mean) {
    return -mean * std::log(uniform01_pos(g));
}

// Box-Muller, cosine branch only.
inline double sample_normal(std::mt19937_64& g) {
    const double u1 = uniform01_pos(g);
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace eepc
