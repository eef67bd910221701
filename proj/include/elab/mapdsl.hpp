#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "elab/common.hpp"
#include "elab/laurent.hpp"

namespace elab::dsl {

// Grammar: x[n+1] = <expr> over x[n], x[n-1], integer constants, + - * / ^.
// '^' binds tightest and is right-associative with integer exponents;
// rational constants are written as quotients (e.g. 3/4).  The full EBNF
// is returned by grammar_ebnf() and reproduced in the README.

enum class NodeKind { constant, x_cur, x_prev, add, sub, mul, div, neg, pow };

struct Node {
    NodeKind kind = NodeKind::constant;
    mpq_class value;    // constant
    long exponent = 0;  // pow
    std::shared_ptr<const Node> lhs, rhs;
};

// Sparse integer polynomial in X = x[n], Y = x[n-1].
struct BiPoly {
    std::map<std::pair<int, int>, mpz_class> terms;  // (deg X, deg Y) -> coefficient

    bool is_zero() const { return terms.empty(); }
    int deg_x() const;
    int deg_y() const;
    mpq_class eval(const mpq_class& x, const mpq_class& y) const;
};

// A parsed map.  num/den preserve the written fraction up to a common
// integer content and the denominator's sign; common *polynomial* factors
// are deliberately not cancelled, since they encode genuine singularities
// of the map as written (x[n]/x[n] is undefined at x[n] = 0).
struct MapDef {
    std::shared_ptr<const Node> ast;
    BiPoly num, den;
    std::vector<std::string> warnings;
    std::size_t node_count = 0;
};

struct ParseLimits {
    std::size_t max_nodes = 10000;
    long max_exponent = 512;
};

MapDef parse_map(const std::string& text, const ParseLimits& limits = {});

// Canonical rendering; parse -> pretty_print -> parse is a fixed point.
std::string pretty_print(const MapDef& map);

// The built-in family member x[n+1] = -x[n-1] + x[n] + 1/x[n]^k.
MapDef family_map(int k);

// EBNF text of the published grammar.
const char* grammar_ebnf();

// Exact orbit x_1 .. x_n from (x_{-1}, x_0).  Throws SingularOrbit(m) when
// the denominator vanishes while computing x_m.
std::vector<mpq_class> eval_exact(const MapDef& map, const mpq_class& x_prev,
                                  const mpq_class& x0, int n_steps);

// One update step on Laurent series, for singularity analysis of user maps.
sc::LaurentSeries series_step(const MapDef& map, const sc::LaurentSeries& x_prev,
                              const sc::LaurentSeries& x_cur);

// Degrees of the reduced numerator when the map is iterated over F_p(t)
// along a generic affine line x_{-1} = b0 + b1 t, x_0 = a0 + a1 t.  An
// axis-parallel line (x_{-1} constant) provably undercounts for the
// built-in family, so the line is fully generic; coefficients are drawn
// from the seed.  Index n of `degrees` is the degree after n steps
// (degrees[0] = 1 for the starting line).
struct DegreeProfile {
    std::uint64_t prime = 0;
    std::uint64_t seed = 0;
    std::vector<long> degrees;
    int retries = 0;    // singular-line reseeds consumed
    std::string note;
};

DegreeProfile degree_profile_modp(const MapDef& map, int n_max, std::uint64_t prime,
                                  std::uint64_t seed);

// Several independent (prime, seed) runs; pointwise maximum plus a
// disagreement report.  A single run can undercount on a bad line with
// probability O(d^2/p) per step, never overcount the generic degree.
struct ProfileConsensus {
    std::vector<long> degrees;
    bool agreed = true;
    std::vector<DegreeProfile> runs;
    std::string disagreement;  // empty when all runs match
};

ProfileConsensus profile_consensus(
    const MapDef& map, int n_max,
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& prime_seed_pairs);

// Largest n_max for the built-in family that stays inside the desk budget
// (both time and the Berlekamp-Massey stability margin are considered).
int family_profile_window(int k);

std::string profile_csv(const ProfileConsensus& pc);
std::string profile_json(const ProfileConsensus& pc, const std::string& map_text);

}  // namespace elab::dsl
