#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "elab/common.hpp"

namespace elab {

// Sparse homogeneous polynomials in Z[a,b,c].  Terms are kept sorted in
// descending (ea, eb) order; ec is stored explicitly but is redundant for a
// homogeneous polynomial.  The zero polynomial has no terms and no degree.

struct Term {
    uint32_t ea = 0, eb = 0, ec = 0;
    mpz_class coef;

    int total_degree() const { return static_cast<int>(ea) + static_cast<int>(eb) + static_cast<int>(ec); }
};

enum class MulKernel {
    Auto,
    Serial,   // hash accumulation, reference implementation
    Omp,      // block-parallel hash accumulation with deterministic merge
    Packed,   // Kronecker packing onto one big integer, GMP does the work
};

class HomoPoly {
public:
    HomoPoly() = default;

    static HomoPoly zero() { return HomoPoly(); }
    static HomoPoly constant(const mpz_class& v);
    static HomoPoly monomial(const mpz_class& coef, unsigned ea, unsigned eb, unsigned ec);
    static HomoPoly var_a() { return monomial(1, 1, 0, 0); }
    static HomoPoly var_b() { return monomial(1, 0, 1, 0); }
    static HomoPoly var_c() { return monomial(1, 0, 0, 1); }

    // sorts, combines like terms, drops zeros, checks homogeneity
    static HomoPoly from_terms(std::vector<Term> terms);

    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    const std::vector<Term>& terms() const { return terms_; }

    // throws ZeroPolyError for the zero polynomial
    int degree() const;

    bool operator==(const HomoPoly& o) const;
    bool operator!=(const HomoPoly& o) const { return !(*this == o); }

    HomoPoly operator-() const;
    friend HomoPoly operator+(const HomoPoly& f, const HomoPoly& g);
    friend HomoPoly operator-(const HomoPoly& f, const HomoPoly& g);

    static HomoPoly mul(const HomoPoly& f, const HomoPoly& g, MulKernel kernel = MulKernel::Auto);
    static HomoPoly pow(const HomoPoly& f, unsigned e, MulKernel kernel = MulKernel::Auto);

    // exact division in Z[a,b,c]; throws NotDivisible when f is not a
    // Z-polynomial multiple of g.  Serial/Omp force the sparse elimination
    // path, Packed forces the modular reconstruction path.
    static HomoPoly divide_exact(const HomoPoly& f, const HomoPoly& g, MulKernel kernel = MulKernel::Auto);

    // single-divisor division with remainder under the term order; the
    // remainder is zero exactly when g divides f over Q (lead-term argument)
    static std::pair<HomoPoly, HomoPoly> divrem(const HomoPoly& f, const HomoPoly& g);

    // substitution a -> ga, b -> gb, c -> gc where gb and gc must be
    // monomials (the general case is not needed and not supported)
    static HomoPoly substitute(const HomoPoly& f, const HomoPoly& ga, const HomoPoly& gb, const HomoPoly& gc,
                               MulKernel kernel = MulKernel::Auto);

    // throws ZeroPolyError on the zero polynomial
    int ord_a() const;
    int ord_b() const;
    int ord_c() const;

    // divide by a^e (throws NotDivisible if some term has ea < e)
    HomoPoly shift_down_a(unsigned e) const;

    // keep only terms with ea == 0 (the a=0 specialization)
    HomoPoly at_a_zero() const;

    mpq_class eval_q(const mpq_class& a, const mpq_class& b, const mpq_class& c) const;
    uint64_t eval_modp(uint64_t a, uint64_t b, uint64_t c, uint64_t p) const;

    // dense coefficients of f(t, b0, c0) mod p, indexed by the a-exponent
    std::vector<uint64_t> univariate_in_a_modp(uint64_t b0, uint64_t c0, uint64_t p) const;
    // dense coefficients of f(a0, t, c0) mod p, indexed by the b-exponent
    std::vector<uint64_t> univariate_in_b_modp(uint64_t a0, uint64_t c0, uint64_t p) const;

    mpz_class content() const;  // gcd of coefficients, nonnegative; 0 for the zero polynomial
    std::size_t max_coef_bits() const;

    int max_ea() const;
    int max_eb() const;

    // canonical text form, exact round-trip with parse()
    std::string to_string() const;
    static HomoPoly parse(const std::string& text);

private:
    // invariant: sorted descending by (ea, eb), nonzero coefficients, all
    // terms of equal total degree
    std::vector<Term> terms_;

    static HomoPoly mul_serial(const HomoPoly& f, const HomoPoly& g);
    static HomoPoly mul_omp(const HomoPoly& f, const HomoPoly& g);
    static HomoPoly mul_packed(const HomoPoly& f, const HomoPoly& g);
    static HomoPoly divide_small(const HomoPoly& f, const HomoPoly& g);
    static HomoPoly divide_kronecker_crt(const HomoPoly& f, const HomoPoly& g);
};

int set_poly_threads(int n);  // returns the previous value
int poly_threads();

}  // namespace elab
