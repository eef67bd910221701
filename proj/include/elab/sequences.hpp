#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "elab/common.hpp"
#include "elab/dyadic.hpp"

namespace elab::seq {

struct DegreeSeq {
    std::string label;  // one of s, t, d, beta, alpha, custom
    std::vector<mpz_class> values;
};

// u_n = c_1 u_{n-1} + ... + c_m u_{n-m} + constant
struct LinearRecurrence {
    int order = 0;
    std::vector<mpq_class> coefficients;
    mpq_class constant = 0;

    // monic characteristic polynomial with cleared denominators,
    // little-endian integer coefficients
    std::vector<mpz_class> char_poly() const;
};

// exponent of a dividing the n-th projective iterate
DegreeSeq beta_seq(int k, int n_max);

// deconvolution of beta used to peel unit powers off the shifted chain
DegreeSeq alpha_seq(int k, int n_max);

enum class MinClass { eq_beta_via_B2, eq_beta_via_B3, strict };

struct BBounds {
    mpz_class b2, b3;
    MinClass min_class;
};

// the two competing upper bounds for beta_n at odd k, with the mod-3
// classification of which quantity realizes beta_n
BBounds b_bounds(int k, int n);

struct DegreePair {
    DegreeSeq st;  // s for even k (and k=1), t for odd k >= 3
    DegreeSeq d;
};

DegreePair degree_seqs(int k, int n_max);

// minimal homogeneous linear recurrence satisfied by the whole sequence
// (Berlekamp-Massey over exact rationals); FitUnstable when the data
// window is too short to pin the fit down
LinearRecurrence fit_recurrence(const DegreeSeq& seq);

// largest real root of the monic characteristic polynomial, enclosed to
// 2^-prec_bits; integer roots come back exact.  RootNotFound when the
// polynomial has no positive real root.
DyadicInterval dominant_root(const LinearRecurrence& rec, long prec_bits);
DyadicInterval dominant_root_of(const std::vector<mpz_class>& char_poly_le, long prec_bits);

enum class EntropySource { closed_form, fitted };

struct EntropyResult {
    DyadicInterval root;
    DyadicInterval entropy;
    std::vector<mpz_class> char_poly;  // little-endian
    EntropySource source;
};

constexpr long kEntropyPrecBits = 220;  // a bit beyond 60 decimal digits

// the two closed forms, selectable independently of the parity of k (the
// pointwise comparison between them is part of the verified properties)
EntropyResult entropy_formula(int k, bool even_branch, long prec_bits = kEntropyPrecBits);

EntropyResult entropy_closed(int k, long prec_bits = kEntropyPrecBits);
EntropyResult entropy_fitted(const DegreeSeq& seq, long prec_bits = kEntropyPrecBits);

std::string seq_to_json(const DegreeSeq& seq, int k);
std::string recurrence_to_json(const LinearRecurrence& rec, const std::string& label, int k);

}  // namespace elab::seq
