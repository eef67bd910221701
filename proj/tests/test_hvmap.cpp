#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "elab/common.hpp"
#include "elab/hvmap.hpp"
#include "elab/poly.hpp"
#include "elab/sequences.hpp"

using namespace elab;
using namespace elab::hv;

namespace {

HomoPoly p1_closed(int k) {
    unsigned ku = static_cast<unsigned>(k);
    return HomoPoly::from_terms({
        Term{ku + 1, 0, 0, 1},
        Term{ku, 1, 0, -1},
        Term{0, 0, ku + 1, 1},
    });
}

mpq_class q_of(long num, long den) { return mpq_class(num, den); }

}  // namespace

TEST_CASE("projective step produces the closed first and second iterates") {
    auto s0 = ProjectiveState::initial();
    auto s1 = step_projective(s0, 2);
    CHECK(s1.n == 1);
    CHECK(s1.p.to_string() == "a^3 - a^2*b + c^3");
    CHECK(s1.q.to_string() == "a^3");
    CHECK(s1.r.to_string() == "a^2*c");

    auto s2 = step_projective(s1, 2);
    // p_2 = (c^3 - a^2 b) p_1^2 + c^3 a^6
    HomoPoly p1 = p1_closed(2);
    HomoPoly lead = HomoPoly::from_terms({Term{0, 0, 3, 1}, Term{2, 1, 0, -1}});
    HomoPoly expect = HomoPoly::mul(lead, HomoPoly::pow(p1, 2)) + HomoPoly::monomial(1, 6, 0, 3);
    CHECK(s2.p == expect);
    CHECK(s2.q == HomoPoly::pow(p1, 3));
    CHECK(s2.r == HomoPoly::mul(HomoPoly::monomial(1, 2, 0, 1), HomoPoly::pow(p1, 2)));
}

TEST_CASE("product-form iterate agrees with the projective step") {
    for (int k : {1, 2, 3}) {
        auto s = ProjectiveState::initial();
        for (int n = 1; n <= 4; ++n) {
            s = step_projective(s, k);
            HomoPoly pn = iterate_pn(k, n);
            CHECK(pn == s.p);
            long expect_deg = 1;
            for (int i = 0; i < n; ++i) expect_deg *= (k + 1);
            CHECK(pn.degree() == expect_deg);
        }
    }
    // a-order of the fourth-degree iterate matches the unit-exponent table
    CHECK(iterate_pn(2, 3).ord_a() == 3);
    CHECK(iterate_pn(3, 3).ord_a() == 4);
}

TEST_CASE("iterates past the desk ceiling are refused") {
    CHECK_THROWS_AS(iterate_pn(4, 6), RingError);
    CHECK_THROWS_AS(iterate_pn(9, 4), RingError);
}

TEST_CASE("factor chain at k = 2 carries the scheduled degrees and seeds") {
    FactorChain chain(2, ChainSeeds::unit);
    chain = extend_chain_to(std::move(chain), 5);
    const int s_expect[] = {1, 3, 9, 24, 64, 168};
    for (int n = 0; n <= 5; ++n) CHECK(chain.degree_at(n) == s_expect[n]);
    for (int i = -4; i <= -1; ++i) CHECK(chain.at(i) == HomoPoly::constant(1));
    CHECK(chain.at(0) == HomoPoly::var_a());
    CHECK(chain.at(1) == p1_closed(2));
    CHECK(chain.at(2) == iterate_pn(2, 2));
    // entries past the first two drop their unit content: no a divides them
    for (int n = 1; n <= 5; ++n) CHECK(chain.at(n).ord_a() == 0);
    CHECK(chain.beta().size() == 6);
    CHECK(chain.beta()[3] == 3);
    CHECK(chain.alpha()[3] == 3);
}

TEST_CASE("fourth chain entry matches the division by the unit cofactor") {
    FactorChain chain(2, ChainSeeds::unit);
    chain = extend_chain_to(std::move(chain), 4);
    // p_4 = a^8 p_1^3 p'_4, so stripping a^8 and dividing by p_1^3 must
    // reproduce the chain entry computed by the recurrence
    HomoPoly shifted = iterate_pn(2, 4).shift_down_a(8);
    HomoPoly q = HomoPoly::divide_exact(shifted, HomoPoly::pow(p1_closed(2), 3));
    CHECK(q == chain.at(4));
}

TEST_CASE("extended seed convention regenerates the same chain") {
    FactorChain unit_chain(2, ChainSeeds::unit);
    unit_chain = extend_chain_to(std::move(unit_chain), 4);
    FactorChain b_chain(2, ChainSeeds::with_b);
    CHECK(b_chain.at(-4) == HomoPoly::var_b());
    CHECK(recurrence_start(2, ChainSeeds::with_b) == 1);
    b_chain = extend_chain_to(std::move(b_chain), 4, ChainMode::recurrence);
    for (int n = 1; n <= 4; ++n) CHECK(b_chain.at(n) == unit_chain.at(n));
}

TEST_CASE("factor chain at k = 3 carries the odd-parity degrees") {
    FactorChain chain(3, ChainSeeds::unit);
    chain = extend_chain_to(std::move(chain), 5);
    const int t_expect[] = {1, 4, 16, 60, 228, 864};
    for (int n = 0; n <= 5; ++n) CHECK(chain.degree_at(n) == t_expect[n]);
    CHECK(chain.at(1) == p1_closed(3));
    CHECK(chain.at(2) == iterate_pn(3, 2));
    for (int n = 1; n <= 5; ++n) CHECK(chain.at(n).ord_a() == 0);
}

TEST_CASE("chain extension past the ceiling is refused") {
    FactorChain chain(5, ChainSeeds::unit);
    chain = extend_chain_to(std::move(chain), 3);
    CHECK(chain.degree_at(3) == 210);
    FactorChain tail = extend_chain(chain);  // n = 4 is still inside the ceiling
    CHECK(tail.degree_at(4) == 1230);
    CHECK_THROWS_AS(extend_chain(tail), RingError);  // t_5 = 7200 is past it
    CHECK_THROWS_AS(extend_chain_to(FactorChain(6, ChainSeeds::unit), 1), RingError);
}

TEST_CASE("product identity holds with the tabulated unit exponents") {
    FactorChain chain2(2, ChainSeeds::unit);
    chain2 = extend_chain_to(std::move(chain2), 4);
    auto rep = product_identity_check(chain2, 4);
    CHECK(rep.pass);
    CHECK(rep.lhs_degree == 81);
    CHECK(rep.rhs_degree == 81);
    REQUIRE(rep.exponents.size() == 5);
    CHECK(rep.exponents[0] == 8);
    CHECK(rep.exponents[1] == 3);
    CHECK(rep.exponents[2] == 0);
    CHECK(rep.exponents[3] == 0);
    CHECK(rep.exponents[4] == 1);

    FactorChain chain3(3, ChainSeeds::unit);
    chain3 = extend_chain_to(std::move(chain3), 5);
    auto rep3 = product_identity_check(chain3, 5);
    CHECK(rep3.pass);
    REQUIRE(rep3.exponents.size() == 6);
    CHECK(rep3.exponents[0] == 48);
    CHECK(rep3.exponents[1] == 12);
    CHECK(rep3.exponents[2] == 4);
    CHECK(rep3.exponents[3] == 0);
    CHECK(rep3.exponents[4] == 0);
    CHECK(rep3.exponents[5] == 1);
}

TEST_CASE("rational orbit reproduces the hand-computed prefix") {
    auto orbit = rational_orbit(2, 0, 1, 3);
    REQUIRE(orbit.size() == 3);
    CHECK(orbit[0] == 2);
    CHECK(orbit[1] == q_of(5, 4));
    CHECK(orbit[2] == q_of(-11, 100));

    // x_1 = -2 + 1 + 1 = 0, so the second step divides by zero
    try {
        rational_orbit(1, 2, 1, 4);
        FAIL("expected a singular orbit");
    } catch (const SingularOrbit& e) {
        CHECK(e.step == 2);
    }
}

TEST_CASE("reduced form of x_n evaluates to the direct orbit") {
    FactorChain chain2(2, ChainSeeds::unit);
    chain2 = extend_chain_to(std::move(chain2), 5);
    auto r3 = x_reduced(chain2, 3);
    REQUIRE(r3.numerator.size() == 2);
    CHECK(r3.numerator[0].first == chain2.at(3));
    CHECK(r3.numerator[1].first == HomoPoly::var_a());
    REQUIRE(r3.denominator.size() == 2);
    CHECK(r3.denominator[0].second == 2);
    CHECK(r3.denominator[1].second == 2);
    CHECK(r3.c_power == 1);
    CHECK(r3.degree_numerator() == 25);
    CHECK(r3.degree_denominator() == 25);
    CHECK(r3.eval(1, 0, 1) == q_of(-11, 100));

    mpq_class a = q_of(7, 3), b = q_of(-2, 5), c = q_of(4, 9);
    auto orbit = rational_orbit(2, b / c, a / c, 5);
    CHECK(x_reduced(chain2, 0).eval(a, b, c) == a / c);
    for (int n = 1; n <= 5; ++n) {
        CHECK(x_reduced(chain2, n).eval(a, b, c) == orbit[static_cast<size_t>(n - 1)]);
    }

    FactorChain chain3(3, ChainSeeds::unit);
    chain3 = extend_chain_to(std::move(chain3), 5);
    auto o3 = x_reduced(chain3, 4);
    // exponent pattern 1, -k, -k, 1, -k on entries 4, 3, 2, 1, 0
    REQUIRE(o3.numerator.size() == 2);
    CHECK(o3.numerator[0].first == chain3.at(4));
    CHECK(o3.numerator[1].first == chain3.at(1));
    REQUIRE(o3.denominator.size() == 3);
    CHECK(o3.denominator[0].first == chain3.at(3));
    CHECK(o3.denominator[1].first == chain3.at(2));
    CHECK(o3.denominator[2].first == HomoPoly::var_a());
    for (const auto& [f, e] : o3.denominator) CHECK(e == 3);
    CHECK(o3.degree_numerator() == o3.degree_denominator());

    auto orbit3 = rational_orbit(3, b / c, a / c, 5);
    for (int n = 1; n <= 5; ++n) {
        CHECK(x_reduced(chain3, n).eval(a, b, c) == orbit3[static_cast<size_t>(n - 1)]);
    }
}

TEST_CASE("reduced-form degrees follow the d sequence") {
    auto d2 = seq::degree_seqs(2, 6).d.values;
    FactorChain chain2(2, ChainSeeds::unit);
    chain2 = extend_chain_to(std::move(chain2), 6);
    for (int n = 3; n <= 6; ++n) {
        auto r = x_reduced(chain2, n);
        CHECK(mpz_class(r.degree_numerator()) == d2[static_cast<size_t>(n)]);
        CHECK(mpz_class(r.degree_denominator()) == d2[static_cast<size_t>(n)]);
    }
    auto d3 = seq::degree_seqs(3, 5).d.values;
    FactorChain chain3(3, ChainSeeds::unit);
    chain3 = extend_chain_to(std::move(chain3), 5);
    for (int n = 3; n <= 5; ++n) {
        CHECK(mpz_class(x_reduced(chain3, n).degree_numerator()) == d3[static_cast<size_t>(n)]);
    }
}

TEST_CASE("exponent pattern repeats with period three") {
    const int expect[] = {1, -3, -3, 1, -3, -3, 1};
    for (int j = 0; j <= 6; ++j) CHECK(exp_pattern(3, j) == expect[j]);
    CHECK(exp_pattern(5, 1) == -5);
}

TEST_CASE("gauge sequence satisfies the unit relation") {
    GaugeSeq g = gauge_sequence(2, q_of(3, 2), q_of(-5, 1), q_of(7, 3), 6);
    CHECK(g.value_at(-1) == q_of(3, 2));
    CHECK(g.value_at(-3) == q_of(7, 3));
    // u_0 = (mu1 mu2)^2 / mu3
    CHECK(g.value_at(0) == q_of(3, 2) * q_of(3, 2) * 25 * q_of(3, 7));
    const long e1[] = {6, 3, -2};
    const long e2[] = {15, 10, -6};
    const long e3[] = {40, 24, -15};
    const long e4[] = {104, 65, -40};
    const long e5[] = {273, 168, -104};
    const long* frozen[] = {e1, e2, e3, e4, e5};
    for (int n = 1; n <= 5; ++n) {
        for (int c = 0; c < 3; ++c) {
            CHECK(g.exp_at(n)[static_cast<size_t>(c)] == frozen[n - 1][c]);
        }
    }
    for (int n = 0; n <= 6; ++n) {
        mpq_class lhs = g.value_at(n) * g.value_at(n - 3);
        mpq_class prod = g.value_at(n - 1) * g.value_at(n - 2);
        CHECK(lhs == prod * prod);
    }

    GaugeSeq ones = gauge_sequence(3, 1, 1, 1, 4);
    for (int n = -4; n <= 4; ++n) CHECK(ones.value_at(n) == 1);

    CHECK_THROWS_AS(gauge_sequence(2, q_of(3, 2), 0, 1, 3), DegenerateGauge);
}

TEST_CASE("chain dump writes a manifest and canonical entry files") {
    FactorChain chain(2, ChainSeeds::unit);
    chain = extend_chain_to(std::move(chain), 3);
    std::string dir = "chain_dump_tmp";
    dump_chain(chain, dir);

    std::ifstream mf(std::filesystem::path(dir) / "manifest.json");
    REQUIRE(mf.good());
    std::stringstream buf;
    buf << mf.rdbuf();
    std::string text = buf.str();
    CHECK(text.find("\"schema\": \"entropy-lab/1\"") != std::string::npos);
    CHECK(text.find("\"k\": 2") != std::string::npos);
    CHECK(text.find("\"n\": 3") != std::string::npos);
    CHECK(text.find("\"beta\"") != std::string::npos);

    std::ifstream ef(std::filesystem::path(dir) / "p_prime_3.txt");
    REQUIRE(ef.good());
    std::string line;
    std::getline(ef, line);
    CHECK(HomoPoly::parse(line) == chain.at(3));

    std::ifstream uf(std::filesystem::path(dir) / "p_prime_m2.txt");
    std::getline(uf, line);
    CHECK(line == "1");
    std::filesystem::remove_all(dir);
}
