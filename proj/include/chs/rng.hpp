#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace chs {

// Splitmix64 stream addressed by a (seed, a, b, c) key. Every experiment,
// replicate, and cell gets its own stream derived from counters, so results
// do not depend on scheduling order and work can be farmed out to threads
// without shared generator state.
//
// Distributions are hand-rolled on top of the raw 64-bit output: the
// standard-library distributions are implementation-defined, which would
// break byte-identical reports across toolchains.
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t state) : state_(state) {}

    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

    std::uint64_t operator()() { return next_u64(); }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform in [0, 1), 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform index in [0, n). Lemire's multiply-and-reject method, no modulo bias.
    std::size_t next_index(std::size_t n) {
        std::uint64_t x = next_u64();
        auto m = static_cast<unsigned __int128>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - static_cast<std::uint64_t>(n)) % n;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<unsigned __int128>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::size_t>(m >> 64);
    }

    // Standard normal via Box-Muller; the sine twin is discarded so each call
    // consumes exactly two 64-bit words.
    double next_normal() {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

namespace rng_tag {
// Stream roles; keeps tuning draws, evaluation draws, subset picks, data
// generation, and bootstrap resampling on disjoint streams even when the
// remaining key words collide.
inline constexpr std::uint64_t kTune = 0x74756e65;
inline constexpr std::uint64_t kEval = 0x6576616c;
inline constexpr std::uint64_t kSubset = 0x73756273;
inline constexpr std::uint64_t kGenerate = 0x67656e;
inline constexpr std::uint64_t kBootstrap = 0x626f6f74;
}  // namespace rng_tag

inline std::uint64_t combine_key(std::uint64_t h, std::uint64_t v) {
    return RngStream::mix(h + 0x9e3779b97f4a7c15ull + v);
}

inline RngStream make_stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                             std::uint64_t c = 0) {
    std::uint64_t s = combine_key(0x243f6a8885a308d3ull, seed);
    s = combine_key(s, a);
    s = combine_key(s, b);
    s = combine_key(s, c);
    return RngStream(s);
}

}  // namespace chs
