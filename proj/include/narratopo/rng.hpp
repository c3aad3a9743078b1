#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace ntp {

// xoshiro256** seeded through splitmix64. The std distributions are not
// pinned across standard library implementations, so every draw used in an
// artifact goes through this generator.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next();

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);

    // Uniform integer in [0, n), unbiased; n must be > 0.
    uint64_t below(uint64_t n);

    // Uniform integer in [lo, hi] inclusive.
    int64_t range(int64_t lo, int64_t hi);

    // Standard normal via the polar method.
    double normal();

    // Index drawn proportionally to non-negative weights.
    size_t categorical(std::span<const double> weights);

private:
    uint64_t s_[4];
    double spare_normal_ = 0.0;
    bool have_spare_ = false;
};

// Child seed for a named stage: every stage draws from the root seed without
// coupling to the draw order of other stages.
uint64_t fork_seed(uint64_t root, std::string_view stage);

} // namespace ntp
