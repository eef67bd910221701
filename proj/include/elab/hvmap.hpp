#pragma once

#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "elab/poly.hpp"
#include "elab/sequences.hpp"

namespace elab::hv {

// The map under study: x_{n+1} = -x_{n-1} + x_n + 1/x_n^k, iterated exactly
// in several representations that must all agree.

struct MapParams {
    int k = 2;
};

// Homogeneous coordinates [p : q : r] = [x_n : x_{n-1} : 1].  One step:
//   p' = p^{k+1} - q p^k + r^{k+1},  q' = p^{k+1},  r' = r p^k
// No cancellation is performed here; degrees multiply by exactly k+1.
struct ProjectiveState {
    int n = 0;
    HomoPoly p, q, r;

    static ProjectiveState initial();  // (a, b, c) at n = 0
};

ProjectiveState step_projective(const ProjectiveState& s, int k, MulKernel kernel = MulKernel::Auto);

// Full projective numerator p_n of degree (k+1)^n, memoized per (k, n).
// Computed by the product-form recurrence that reuses the running power of
// p_0...p_{n-1} instead of carrying q_n and r_n.
HomoPoly iterate_pn(int k, int n, MulKernel kernel = MulKernel::Auto);
void clear_pn_cache();

// Two seed conventions for the factor chain.  Both place 1,1,1 at indices
// -3..-1 and a at index 0; the extended convention additionally seeds b at
// index -4, which lets the even-k recurrence regenerate the first iterate
// from the seeds alone.
enum class ChainSeeds { unit, with_b };

// How a new chain entry is computed.  t_substitution applies the shift
// operator T (a,b,c) -> (p_1, a^{k+1}, a^k c) and strips the known a-power;
// recurrence uses the parity-specific entry recurrence with its exact
// division.  both runs every mode that is affordable at this size and
// insists on bitwise agreement.
enum class ChainMode { t_substitution, recurrence, both };

class FactorChain {
public:
    FactorChain(int k, ChainSeeds seeds);

    int k() const { return k_; }
    ChainSeeds seeds() const { return seeds_; }
    int n_max() const { return n_max_; }

    // entries are defined for -4 <= i <= n_max
    const HomoPoly& at(int i) const;
    int degree_at(int i) const;

    const std::vector<mpz_class>& beta() const { return beta_; }
    const std::vector<mpz_class>& alpha() const { return alpha_; }

    friend FactorChain extend_chain(const FactorChain& chain, ChainMode mode, MulKernel kernel);

private:
    int k_;
    ChainSeeds seeds_;
    int n_max_;
    std::vector<std::shared_ptr<const HomoPoly>> entries_;  // index i at entries_[i+4]
    std::vector<mpz_class> beta_, alpha_;
};

// appends entry n_max+1; throws IdentityViolation when a mode fails or the
// modes disagree, RingError past the desk-size ceiling
FactorChain extend_chain(const FactorChain& chain, ChainMode mode = ChainMode::both,
                         MulKernel kernel = MulKernel::Auto);
FactorChain extend_chain_to(FactorChain chain, int n, ChainMode mode = ChainMode::both,
                            MulKernel kernel = MulKernel::Auto);

// is the T-substitution mode affordable at this target index?
bool t_substitution_affordable(int k, int n);
// first index from which the parity recurrence applies
int recurrence_start(int k, ChainSeeds seeds);

struct IdentityReport {
    bool pass = false;
    int k = 0, n = 0;
    int lhs_degree = 0, rhs_degree = 0;
    std::vector<mpz_class> exponents;  // the beta weights on a, p'_1, ..., p'_n
};

// exact polynomial identity: p_n equals the beta-weighted product of chain
// entries.  Failure is a report outcome, not an exception.
IdentityReport product_identity_check(const FactorChain& chain, int n, MulKernel kernel = MulKernel::Auto);

struct ReducedFraction {
    std::vector<std::pair<HomoPoly, unsigned>> numerator;    // (factor, exponent)
    std::vector<std::pair<HomoPoly, unsigned>> denominator;  // excluding the c power
    int c_power = 1;                                         // scalar c^power in the denominator

    int degree_numerator() const;
    int degree_denominator() const;  // includes c_power
    mpq_class eval(const mpq_class& a, const mpq_class& b, const mpq_class& c) const;
};

// fully reduced representation of x_n built from chain entries; honors the
// formal value 1 at negative indices
ReducedFraction x_reduced(const FactorChain& chain, int n);

// the exponent pattern of the odd-parity reduced form: 1, -k, -k repeating
int exp_pattern(int k, int j);

struct GaugeSeq {
    // exponent vectors over (mu1, mu2, mu3) for u_{-4}..u_{n_max}
    std::vector<std::array<mpz_class, 3>> exps;  // index i at exps[i+4]
    // concrete values, filled while the exponents stay small enough to raise
    std::vector<mpq_class> values;               // aligned with exps; may be shorter
    int k = 0;

    const std::array<mpz_class, 3>& exp_at(int i) const;
    bool has_value(int i) const;
    const mpq_class& value_at(int i) const;
};

// unit sequence u_n with u_n u_{n-3} = (u_{n-1} u_{n-2})^k; throws
// DegenerateGauge when any mu vanishes
GaugeSeq gauge_sequence(int k, const mpq_class& mu1, const mpq_class& mu2, const mpq_class& mu3, int n_max);

// direct exact-rational orbit x_1..x_n of the map; throws SingularOrbit when
// some x_m = 0 makes the next step undefined
std::vector<mpq_class> rational_orbit(int k, const mpq_class& x_prev, const mpq_class& x0, int n_steps);

// JSON manifest (k, seed style, degree table, beta/alpha slices) plus one
// canonical-text polynomial file per entry, written under out_dir
void dump_chain(const FactorChain& chain, const std::string& out_dir);

}  // namespace elab::hv
