#pragma once

#include <cstdint>

namespace elab {

// splitmix64: tiny deterministic generator, stable across platforms.
// Used everywhere a reproducible pseudo-random stream is needed.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, bound), bound > 0, negligible modulo bias for our use
    uint64_t below(uint64_t bound) { return next() % bound; }

    // uniform in [1, bound)
    uint64_t nonzero_below(uint64_t bound) {
        uint64_t v;
        do {
            v = below(bound);
        } while (v == 0);
        return v;
    }

private:
    uint64_t state_;
};

}  // namespace elab
