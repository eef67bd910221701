#pragma once

#include <cstdint>
#include <vector>

#include "elab/common.hpp"
#include "elab/modp.hpp"
#include "elab/rng.hpp"

namespace elab {

// Dense univariate polynomials over F_p, p a 62-bit prime.  Coefficients are
// stored little-endian (index = exponent) with no trailing zeros.

using UPoly = std::vector<uint64_t>;

namespace upoly {

void trim(UPoly& f);
inline int deg(const UPoly& f) { return static_cast<int>(f.size()) - 1; }  // -1 for zero
bool is_zero(const UPoly& f);

UPoly add(const UPoly& f, const UPoly& g, uint64_t p);
UPoly sub(const UPoly& f, const UPoly& g, uint64_t p);
UPoly scale(const UPoly& f, uint64_t s, uint64_t p);

UPoly mul(const UPoly& f, const UPoly& g, uint64_t p);
UPoly mul_school(const UPoly& f, const UPoly& g, uint64_t p);
// packs coefficients into one big integer each and lets GMP multiply
UPoly mul_kronecker(const UPoly& f, const UPoly& g, uint64_t p);

// quotient and remainder; fast path uses a Newton inverse of the reversed
// divisor when the sizes warrant it
std::pair<UPoly, UPoly> divrem(const UPoly& f, const UPoly& g, uint64_t p);
UPoly rem(const UPoly& f, const UPoly& g, uint64_t p);

UPoly make_monic(const UPoly& f, uint64_t p);
UPoly gcd(UPoly f, UPoly g, uint64_t p);  // monic

uint64_t eval(const UPoly& f, uint64_t x, uint64_t p);

// x^e mod f (e as a chain of squarings), f monic of degree >= 1
UPoly x_powmod(uint64_t e, const UPoly& f, uint64_t p);
// g(h) mod f by Horner
UPoly compose_mod(const UPoly& g, const UPoly& h, const UPoly& f, uint64_t p);

// Rabin test: true iff f is irreducible over F_p
bool irreducible(const UPoly& f, uint64_t p);

}  // namespace upoly

}  // namespace elab
