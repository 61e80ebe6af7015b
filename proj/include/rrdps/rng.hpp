#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace rrdps {

// Counter-based random stream built on splitmix64. Every (seed, counter)
// pair opens an independent, reproducible sequence, so per-round streams
// can be created in any order (or on any thread) without shared state.
class RoundRng {
public:
    RoundRng(std::uint64_t seed, std::uint64_t counter)
        : state_(scramble(seed + 0x9E3779B97F4A7C15ULL * (counter + 1))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return scramble(state_);
    }

    // uniform double in [0, 1), 53 significant bits
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) {
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument("bernoulli: p outside [0, 1]");
        return uniform() < p;
    }

    // unbiased integer in [0, n) via rejection
    std::uint64_t below(std::uint64_t n) {
        if (n == 0)
            throw std::invalid_argument("below: empty range");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v = next_u64();
        while (v >= limit)
            v = next_u64();
        return v % n;
    }

    // one draw from N(0, stddev^2); Box-Muller keeps the sequence
    // platform-independent (libstdc++ normal_distribution is not pinned)
    double normal(double stddev) {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        return stddev * std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static std::uint64_t scramble(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace rrdps
