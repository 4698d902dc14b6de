#include "carlab/rng.hpp"

#include <cmath>
#include <numbers>

#include "carlab/errors.hpp"

namespace carlab {

double Rng::normal() {
    // u1 in (0, 1] so the log is finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::below(std::size_t n) {
    if (n == 0) throw ValueError("Rng::below: empty range");
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n)) >> 64);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag_a, std::uint64_t tag_b,
                          std::uint64_t tag_c) {
    std::uint64_t h = splitmix64(base);
    h = splitmix64(h ^ tag_a);
    h = splitmix64(h ^ tag_b);
    h = splitmix64(h ^ tag_c);
    return h;
}

}  // namespace carlab
