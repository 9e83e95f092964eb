#pragma once

#include <cstdint>

namespace mosam::detail {

/// splitmix64 step over a combined (seed, stream) value; spreads low-entropy
/// inputs such as frame indices into well-mixed generator seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xorshift64 with a portable uniform [0, 1) draw. Every stochastic piece of
/// the project routes through this so runs are reproducible bit-for-bit
/// regardless of the standard library's distribution internals.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed ? seed : 0x853c49e6748fea9bULL) {}

    std::uint64_t next() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    }

    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

} // namespace mosam::detail
