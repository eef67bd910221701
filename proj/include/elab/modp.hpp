#pragma once

#include <cstdint>
#include <vector>

#include "elab/rng.hpp"

namespace elab {

// Arithmetic mod word-sized primes. Primes are kept below 2^62 so that
// sums of a few residues still fit in uint64 and products fit in __int128.

inline uint64_t mulmod(uint64_t a, uint64_t b, uint64_t p) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
}

inline uint64_t addmod(uint64_t a, uint64_t b, uint64_t p) {
    uint64_t s = a + b;
    if (s >= p) s -= p;
    return s;
}

inline uint64_t submod(uint64_t a, uint64_t b, uint64_t p) {
    return a >= b ? a - b : a + p - b;
}

inline uint64_t powmod(uint64_t base, uint64_t exp, uint64_t p) {
    uint64_t acc = 1 % p;
    base %= p;
    while (exp) {
        if (exp & 1) acc = mulmod(acc, base, p);
        base = mulmod(base, base, p);
        exp >>= 1;
    }
    return acc;
}

inline uint64_t invmod(uint64_t a, uint64_t p) {
    // p prime
    return powmod(a % p, p - 2, p);
}

// A fixed pool of 62-bit primes (verified by trial division offline; all are
// prime). Deterministic index-based selection keeps runs reproducible.
inline const std::vector<uint64_t>& prime_pool() {
    static const std::vector<uint64_t> pool = {
        4611686018427387847ULL,  // 2^62 - 57
        4611686018427387817ULL,  // 2^62 - 87
        4611686018427387787ULL,  // 2^62 - 117
        4611686018427387761ULL,  // 2^62 - 143
        4611686018427387751ULL,  // 2^62 - 153
        4611686018427387737ULL,  // 2^62 - 167
        4611686018427387733ULL,  // 2^62 - 171
        4611686018427387709ULL,  // 2^62 - 195
        4611686018427387701ULL,  // 2^62 - 203
        4611686018427387631ULL,  // 2^62 - 273
        4611686018427387617ULL,  // 2^62 - 287
        4611686018427387587ULL,  // 2^62 - 317
    };
    return pool;
}

inline uint64_t nth_prime(std::size_t i) {
    const auto& pool = prime_pool();
    return pool[i % pool.size()];
}

// deterministic Miller-Rabin, complete for 64-bit inputs
inline bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % q == 0) return n == q;
    }
    uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        uint64_t x = powmod(a % n, d, n);
        if (x == 0 || x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

// deterministic descending stream of 62-bit primes, used for CRT ladders
class PrimeStream {
public:
    PrimeStream() : cur_((uint64_t(1) << 62) - 55) {}

    uint64_t next() {
        while (true) {
            cur_ -= 2;
            if (is_prime_u64(cur_)) return cur_;
        }
    }

private:
    uint64_t cur_;
};

}  // namespace elab
