// Counter-based random generator (SplitMix64 finalizer over seed||counter).
// Stateless mixing keyed by seed makes experiment sampling reproducible
// across platforms and independent of call interleaving.
#pragma once

#include <cstdint>
#include <cmath>

#include "common.hpp"

namespace outwave {

struct CounterRng {
    uint64_t seed = 0;
    uint64_t counter = 0;

    explicit CounterRng(uint64_t s = 0, uint64_t stream = 0)
        : seed(s ^ (0x9e3779b97f4a7c15ull * (stream + 1))) {}

    static uint64_t mix(uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    uint64_t next_u64() { return mix(seed + 0x632be59bd9b4e019ull * ++counter); }

    // uniform on [0,1)
    real uniform() { return real(next_u64() >> 11) * 0x1.0p-53; }
    real uniform(real lo, real hi) { return lo + (hi - lo) * uniform(); }

    // standard normal (Box-Muller, consumes two uniforms)
    real normal() {
        real u1 = uniform(), u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * pi * u2);
    }

    int uniform_int(int lo, int hi) {  // inclusive range
        return lo + int(next_u64() % uint64_t(hi - lo + 1));
    }
};

}  // namespace outwave
