#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace carlab {

// Deterministic random source: MT19937-64 with hand-rolled output transforms.
// The engine's bit stream is fixed by the C++ standard, and the uniform/normal/
// bounded transforms below avoid std::*_distribution (whose streams vary across
// standard libraries), so identical seeds give identical draws on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    // Standard normal via Box-Muller; always consumes exactly two uniforms.
    double normal();

    // Uniform integer in [0, n); n must be >= 1. Multiply-shift bound.
    std::size_t below(std::size_t n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// SplitMix64-mixed sub-seed so independent streams (init, shuffling, replay
// sampling, exemplar selection) never share draws.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag_a, std::uint64_t tag_b = 0,
                          std::uint64_t tag_c = 0);

}  // namespace carlab
