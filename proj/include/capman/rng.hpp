#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace capman {

/// Seedable PRNG with platform-independent draws. The engine is the
/// standard mt19937_64; the mapping to integers and reals is done here
/// because std::*_distribution output is implementation-defined.
class Rng {
public:
    Rng() : Rng(0) {}
    explicit Rng(std::uint64_t seed) { reseed({seed}); }
    Rng(std::uint64_t seed, std::uint64_t stream) { reseed({seed, stream}); }

    void reseed(std::initializer_list<std::uint64_t> words) {
        std::vector<std::uint32_t> halves;
        for (auto w : words) {
            halves.push_back(static_cast<std::uint32_t>(w));
            halves.push_back(static_cast<std::uint32_t>(w >> 32));
        }
        std::seed_seq seq(halves.begin(), halves.end());
        engine_.seed(seq);
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n), n > 0, by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t x = engine_();
            if (x >= threshold) return x % n;
        }
    }

    /// Uniform real in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform real in [lo, hi].
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace capman
