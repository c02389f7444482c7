#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace radiomics {

// SplitMix64-based generator. Self-contained so that shuffles and samples are
// bit-identical across compilers and standard libraries; std::shuffle and
// std::*_distribution are implementation-defined and would break frozen test
// values.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, bound) by rejection; bound must be > 0.
    std::uint64_t uniform_int(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform double in (0, 1), never exactly 0 (safe for log()).
    double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    // Standard normal via Box-Muller (polar form would need rejection; the
    // trig form keeps the draw count per call fixed and deterministic).
    double normal() {
        const double u1 = uniform_open();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Deterministic stream derivation: mixes a master seed with stream
    // indices so parallel workers get independent, reproducible streams.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t a) {
        Rng r(seed ^ (0x9e3779b97f4a7c15ULL * (a + 1)));
        return r.next_u64();
    }
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
        return mix(mix(seed, a), b);
    }
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
        return mix(mix(seed, a, b), c);
    }

private:
    std::uint64_t state_;
};

} // namespace radiomics
