#pragma once

#include <array>
#include <cstdint>

namespace mms {

/// SplitMix64 step; used to expand seeds and to derive independent child
/// seeds for parallel runs.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// xoshiro256** seeded through SplitMix64. The generator identity
/// ("xoshiro256**/splitmix64") is part of the reproducibility contract:
/// identical seeds give identical streams on every platform.
class Xoshiro256ss {
public:
    Xoshiro256ss() : Xoshiro256ss(0) {}

    explicit Xoshiro256ss(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    static Xoshiro256ss from_state(const std::array<std::uint64_t, 4>& state) {
        Xoshiro256ss rng;
        rng.s_ = state;
        return rng;
    }

    const std::array<std::uint64_t, 4>& state() const { return s_; }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Unbiased draw from [0, n) by rejecting the low remainder zone.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (-n) % n;
        std::uint64_t r;
        do {
            r = next();
        } while (r < threshold);
        return r % n;
    }

    /// Child seed for job k of a multi-run invocation.
    static std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t k) {
        std::uint64_t sm = master_seed;
        std::uint64_t child = 0;
        for (std::uint64_t i = 0; i <= k; ++i) child = splitmix64(sm);
        return child;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> s_{};
};

}  // namespace mms
