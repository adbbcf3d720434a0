#pragma once

#include <cstdint>

namespace skewdh {

// xoshiro256** seeded through splitmix64. Self-contained so that seeded runs
// produce identical streams on every platform; std::random distributions do
// not guarantee that.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64(sm);
    }

    // Independent stream for (seed, index), used for per-trial randomness.
    static Rng derive(uint64_t seed, uint64_t index) {
        uint64_t sm = seed;
        uint64_t a = splitmix64(sm);
        uint64_t b = splitmix64(sm);
        return Rng(a ^ (b + 0x9e3779b97f4a7c15ULL * (index + 1)));
    }

    uint64_t next() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, bound); bound >= 1. Rejection sampling keeps it unbiased.
    uint64_t below(uint64_t bound) {
        const uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    bool coin() { return (next() >> 63) != 0; }

private:
    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t state_[4];
};

}  // namespace skewdh
