#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <utility>
#include <vector>

#include "elab/common.hpp"
#include "elab/hvmap.hpp"
#include "elab/mapdsl.hpp"
#include "elab/modp.hpp"
#include "elab/sequences.hpp"

using namespace elab;
using namespace elab::dsl;

namespace {

std::vector<long> expected_d(int k, int n_max) {
    auto pair = seq::degree_seqs(k, n_max);
    std::vector<long> out;
    for (const auto& v : pair.d.values) out.push_back(static_cast<long>(v.get_si()));
    return out;
}

std::pair<uint64_t, uint64_t> ps(std::size_t i, uint64_t seed) { return {nth_prime(i), seed}; }

}  // namespace

TEST_CASE("family strings parse to the family fraction") {
    MapDef m = parse_map("x[n+1] = -x[n-1] + x[n] + 1/x[n]^3");
    MapDef f = family_map(3);
    CHECK(m.num.terms == f.num.terms);
    CHECK(m.den.terms == f.den.terms);
    CHECK(m.warnings.empty());
    CHECK(pretty_print(m) == "x[n+1] = -x[n-1] + x[n] + 1/x[n]^3");

    MapDef k2 = family_map(2);
    BiPoly num_expect;
    num_expect.terms[{3, 0}] = 1;
    num_expect.terms[{2, 1}] = -1;
    num_expect.terms[{0, 0}] = 1;
    BiPoly den_expect;
    den_expect.terms[{2, 0}] = 1;
    CHECK(k2.num.terms == num_expect.terms);
    CHECK(k2.den.terms == den_expect.terms);

    // U+2212 is accepted wherever '-' is
    MapDef uni = parse_map("x[n+1] = −x[n−1] + x[n] + 1/x[n]^3");
    CHECK(uni.num.terms == f.num.terms);
    CHECK(pretty_print(uni) == pretty_print(f));
}

TEST_CASE("pretty-print round trip is a fixed point") {
    const char* samples[] = {
        "x[n+1] = -x[n-1] + x[n] + 1/x[n]^5",
        "x[n+1] = x[n]",
        "x[n+1] = (x[n] + 1)^2/x[n-1]",
        "x[n+1] = 3/4*x[n] - 2",
        "x[n+1] = -(x[n]*x[n-1])",
        "x[n+1] = x[n]^-2 + x[n-1]^0",
        "x[n+1] = 1/(1 + 1/x[n])",
        "x[n+1] = --x[n] + +x[n-1]",
        "x[n+1] = x[n]^2^3",
        "x[n+1] = 2 - (x[n] - x[n-1]) - 1",
    };
    for (const char* s : samples) {
        CAPTURE(s);
        std::string once = pretty_print(parse_map(s));
        std::string twice = pretty_print(parse_map(once));
        CHECK(once == twice);
    }
    CHECK(pretty_print(parse_map("x[n+1] = x[n]^2^3")) == "x[n+1] = x[n]^8");
    CHECK(pretty_print(parse_map("x[n+1] = --x[n]")) == "x[n+1] = x[n]");
}

TEST_CASE("order-degenerate maps carry a warning") {
    MapDef m = parse_map("x[n+1] = x[n]");
    REQUIRE(m.warnings.size() == 1);
    CHECK(m.warnings[0].find("x[n-1]") != std::string::npos);
    CHECK(parse_map("x[n+1] = x[n] + x[n-1]").warnings.empty());
}

TEST_CASE("semantic rejections") {
    CHECK_THROWS_AS(parse_map("x[n+1] = 1/x[n-2]"), SemanticError);
    CHECK_THROWS_AS(parse_map("x[n+1] = x[n+2]"), SemanticError);
    CHECK_THROWS_AS(parse_map("x[n+1] = x[n+1]"), SemanticError);
    CHECK_THROWS_AS(parse_map("x[n+1] = 1/(x[n] - x[n])"), SemanticError);
    CHECK_THROWS_AS(parse_map("x[n+1] = (x[n] - x[n])^-1"), SemanticError);
    CHECK_THROWS_AS(parse_map("x[n+1] = x[n]^600"), SemanticError);
    CHECK_THROWS_AS(parse_map("x[n+1] = x[n]^9^9"), SemanticError);

    ParseLimits tight;
    tight.max_nodes = 3;
    CHECK_THROWS_AS(parse_map("x[n+1] = 1 + 2 + 3 + 4", tight), SemanticError);
}

TEST_CASE("parse errors carry position and expectation") {
    try {
        parse_map("x[n] = 2");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position == 0);
        CHECK(e.expected.find("x[n+1]") != std::string::npos);
    }
    try {
        parse_map("x[n+1] = (x[n]");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.expected.find(")") != std::string::npos);
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_map("x[n+1] = x[n] +"), ParseError);
    CHECK_THROWS_AS(parse_map("x[n+1] = 3 & 4"), ParseError);
    CHECK_THROWS_AS(parse_map("x[n+1] = 1 2"), ParseError);
    CHECK_THROWS_AS(parse_map("x[n+1]"), ParseError);
    CHECK_THROWS_AS(parse_map("x[n+1] = x[3]"), ParseError);
}

TEST_CASE("content and sign normalization") {
    MapDef m = parse_map("x[n+1] = (2*x[n] + 2)/(4*x[n-1])");
    BiPoly num;
    num.terms[{1, 0}] = 1;
    num.terms[{0, 0}] = 1;
    BiPoly den;
    den.terms[{0, 1}] = 2;
    CHECK(m.num.terms == num.terms);
    CHECK(m.den.terms == den.terms);

    MapDef s = parse_map("x[n+1] = 1/(-x[n])");
    BiPoly snum;
    snum.terms[{0, 0}] = -1;
    BiPoly sden;
    sden.terms[{1, 0}] = 1;
    CHECK(s.num.terms == snum.terms);
    CHECK(s.den.terms == sden.terms);
}

TEST_CASE("exact orbits match the hand fixtures") {
    MapDef k2 = family_map(2);
    auto fixed = eval_exact(k2, 1, 1, 5);
    for (const auto& v : fixed) CHECK(v == 1);

    auto orbit = eval_exact(k2, 0, 1, 3);
    REQUIRE(orbit.size() == 3);
    CHECK(orbit[0] == 2);
    CHECK(orbit[1] == mpq_class(5, 4));
    CHECK(orbit[2] == mpq_class(-11, 100));

    try {
        eval_exact(k2, 3, 0, 4);
        FAIL("expected SingularOrbit");
    } catch (const SingularOrbit& e) {
        CHECK(e.step == 1);
    }
    try {
        eval_exact(family_map(1), 2, 1, 4);  // x_1 = 0, so x_2 divides by zero
        FAIL("expected SingularOrbit");
    } catch (const SingularOrbit& e) {
        CHECK(e.step == 2);
    }
}

TEST_CASE("exact orbits agree with the projective reduction") {
    for (int k : {2, 3}) {
        CAPTURE(k);
        MapDef m = family_map(k);
        mpq_class xm1(3, 7), x0(-2, 9);
        auto mine = eval_exact(m, xm1, x0, 6);
        auto theirs = hv::rational_orbit(k, xm1, x0, 6);
        REQUIRE(mine.size() == theirs.size());
        for (std::size_t i = 0; i < mine.size(); ++i) CHECK(mine[i] == theirs[i]);
    }

    // and with x_reduced at matching projective seeds x_{-1} = b/c, x_0 = a/c
    hv::FactorChain chain(2, hv::ChainSeeds::unit);
    chain = hv::extend_chain_to(std::move(chain), 5);
    mpq_class a(5, 2), b(1, 3), c(2);
    MapDef m = family_map(2);
    auto orbit = eval_exact(m, b / c, a / c, 5);
    for (int n = 1; n <= 5; ++n) {
        CAPTURE(n);
        auto red = hv::x_reduced(chain, n);
        CHECK(red.eval(a, b, c) == orbit[static_cast<std::size_t>(n - 1)]);
    }
}

TEST_CASE("series step reproduces the singularity entry") {
    MapDef k2 = family_map(2);
    auto u = sc::LaurentSeries::constant(mpq_class(5, 7), 40);
    auto eps = sc::LaurentSeries::epsilon(40);
    auto x1 = series_step(k2, u, eps);
    CHECK(x1.valuation() == -2);
    CHECK(x1.coefficient(-2) == 1);
    CHECK(x1.coefficient(-1) == 0);
    CHECK(x1.coefficient(0) == mpq_class(-5, 7));
    CHECK(x1.coefficient(1) == 1);

    // run the confinement pattern to the recovery step
    auto xp = eps, xc = x1;
    for (int step = 2; step <= 4; ++step) {
        auto nx = series_step(k2, xp, xc);
        xp = xc;
        xc = nx;
    }
    CHECK(xc.valuation() == 0);
    CHECK(xc.coefficient(0) == mpq_class(5, 7));

    MapDef id = parse_map("x[n+1] = x[n]");
    auto same = series_step(id, u, eps);
    CHECK(same.valuation() == 1);
    CHECK(same.coefficient(1) == 1);
}

TEST_CASE("profiler reproduces the closed degree sequences") {
    for (int k : {1, 2}) {
        CAPTURE(k);
        auto prof = degree_profile_modp(family_map(k), 10, nth_prime(0), 42);
        CHECK(prof.degrees == expected_d(k, 10));
        CHECK(prof.retries == 0);
    }
    auto p3 = degree_profile_modp(family_map(3), 8, nth_prime(1), 7);
    CHECK(p3.degrees == expected_d(3, 8));
}

TEST_CASE("profiler consensus and determinism") {
    MapDef k2 = family_map(2);
    auto pc = profile_consensus(k2, 10, {ps(0, 42), ps(1, 99)});
    CHECK(pc.agreed);
    CHECK(pc.disagreement.empty());
    CHECK(pc.degrees == expected_d(2, 10));
    REQUIRE(pc.runs.size() == 2);
    CHECK(pc.runs[0].degrees == pc.runs[1].degrees);

    auto again = degree_profile_modp(k2, 10, nth_prime(0), 42);
    CHECK(again.degrees == pc.runs[0].degrees);
    CHECK(again.retries == pc.runs[0].retries);
}

TEST_CASE("profiler handles degenerate maps") {
    auto flat = degree_profile_modp(parse_map("x[n+1] = x[n]"), 6, nth_prime(0), 5);
    CHECK(flat.degrees == std::vector<long>(7, 1));

    // non-monomial denominator: the map collapses to the constant 1
    auto one = degree_profile_modp(parse_map("x[n+1] = (x[n] + x[n-1])/(x[n] + x[n-1])"), 4,
                                   nth_prime(0), 5);
    REQUIRE(one.degrees.size() == 5);
    CHECK(one.degrees[0] == 1);
    for (std::size_t i = 1; i < one.degrees.size(); ++i) CHECK(one.degrees[i] == 0);
}

TEST_CASE("profile windows and emitters") {
    CHECK(family_profile_window(1) == 10);
    CHECK(family_profile_window(2) == 10);
    CHECK(family_profile_window(3) == 8);
    CHECK(family_profile_window(4) == 7);
    CHECK(family_profile_window(5) == 6);
    CHECK(family_profile_window(6) == 6);
    CHECK(family_profile_window(7) == 6);
    CHECK(family_profile_window(8) == 5);

    MapDef k2 = family_map(2);
    auto pc = profile_consensus(k2, 3, {ps(0, 42)});
    CHECK(profile_csv(pc) == "n,degree\n0,1\n1,3\n2,9\n3,25\n");
    std::string js = profile_json(pc, pretty_print(k2));
    CHECK(js.find("\"schema\": \"entropy-lab/1\"") != std::string::npos);
    CHECK(js.find("\"agreed\": true") != std::string::npos);
    CHECK(js.find("\"kind\": \"degree-profile\"") != std::string::npos);
}

TEST_CASE("profiled degrees feed the recurrence fitter") {
    auto p2 = degree_profile_modp(family_map(2), 10, nth_prime(0), 42);
    seq::DegreeSeq d2{"profile", {}};
    for (long v : p2.degrees) d2.values.emplace_back(v);
    auto fit2 = seq::fit_recurrence(d2);
    CHECK(fit2.order == 3);
    CHECK(fit2.coefficients == std::vector<mpq_class>{4, -4, 1});

    auto p3 = degree_profile_modp(family_map(3), 8, nth_prime(0), 42);
    seq::DegreeSeq d3{"profile", {}};
    for (long v : p3.degrees) d3.values.emplace_back(v);
    auto fit3 = seq::fit_recurrence(d3);
    CHECK(fit3.order == 3);
    CHECK(fit3.coefficients == std::vector<mpq_class>{4, 0, -3});

    // seven samples now suffice for an order-3 fit (2L + 1 margin)
    seq::DegreeSeq d5{"profile", {}};
    for (long v : expected_d(5, 6)) d5.values.emplace_back(v);
    auto fit5 = seq::fit_recurrence(d5);
    CHECK(fit5.coefficients == std::vector<mpq_class>{6, 0, -5});
}
