#ifndef BAYRN_RNG_HPP
#define BAYRN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

// Seed derivation and portable samplers. All randomness in the project flows
// through these helpers so that a run is a pure function of its master seed:
// engines are std::mt19937_64 (bit-exact sequence per the standard) and the
// distributions below are hand-rolled from raw engine output, avoiding the
// implementation-defined stdlib distributions.

namespace bayrn::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from (seed, a, b, c).
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                            std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ull;
    h ^= splitmix64(s);
    s ^= b + 0xc2b2ae3d27d4eb4full;
    h ^= splitmix64(s);
    s ^= c + 0x165667b19e3779f9ull;
    h ^= splitmix64(s);
    return h;
}

inline std::mt19937_64 engine(std::uint64_t seed, std::uint64_t a = 0,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
    return std::mt19937_64{derive(seed, a, b, c)};
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * uniform01(gen);
}

// Standard normal via Box-Muller; always consumes exactly two uniforms.
inline double gaussian(std::mt19937_64& gen) {
    double u = uniform01(gen);
    double v = uniform01(gen);
    if (u <= 0.0) u = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925287 * v);
}

inline double gaussian(std::mt19937_64& gen, double mean, double stddev) {
    return mean + stddev * gaussian(gen);
}

// Normal truncated to [lo, hi] by rejection; falls back to clamping after
// kMaxTries so degenerate intervals still terminate.
inline double trunc_gaussian(std::mt19937_64& gen, double mean, double stddev,
                             double lo, double hi) {
    constexpr int kMaxTries = 128;
    if (stddev <= 0.0) {
        return std::min(std::max(mean, lo), hi);
    }
    for (int i = 0; i < kMaxTries; ++i) {
        const double x = gaussian(gen, mean, stddev);
        if (x >= lo && x <= hi) return x;
    }
    return std::min(std::max(mean, lo), hi);
}

}  // namespace bayrn::rng

#endif  // BAYRN_RNG_HPP
