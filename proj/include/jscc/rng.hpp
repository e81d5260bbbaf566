#pragma once

// SplitMix64: a counter-based generator. Output k of a stream is mix(base + k * golden),
// so every (seed, stream) pair names an independent, order-free substream.

#include <cstdint>

namespace jscc {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

    /// Substream keyed by (seed, a, b); distinct keys give unrelated sequences.
    static SplitMix64 substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
        std::uint64_t h = mix(seed ^ 0x6a09e667f3bcc909ULL);
        h = mix(h ^ (a + 0x9e3779b97f4a7c15ULL));
        h = mix(h ^ (b + 0xbb67ae8584caa73bULL));
        return SplitMix64(h);
    }

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on {0, ..., n-1}; rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) noexcept {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t r;
        do r = next();
        while (r >= limit);
        return r % n;
    }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

}  // namespace jscc
