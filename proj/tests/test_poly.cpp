#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "elab/modp.hpp"
#include "elab/poly.hpp"
#include "elab/rng.hpp"

using elab::HomoPoly;
using elab::MulKernel;
using elab::Term;

namespace {

HomoPoly A() { return HomoPoly::var_a(); }
HomoPoly B() { return HomoPoly::var_b(); }
HomoPoly C() { return HomoPoly::var_c(); }

HomoPoly random_homo(elab::SplitMix64& rng, int degree, int terms, int coef_bits) {
    std::vector<Term> out;
    for (int i = 0; i < terms; ++i) {
        uint32_t ea = static_cast<uint32_t>(rng.below(static_cast<uint64_t>(degree) + 1));
        uint32_t eb = static_cast<uint32_t>(rng.below(static_cast<uint64_t>(degree) - ea + 1));
        uint32_t ec = static_cast<uint32_t>(degree) - ea - eb;
        mpz_class c = 0;
        for (int w = 0; w < (coef_bits + 63) / 64; ++w) {
            c <<= 64;
            mpz_class limb;
            uint64_t v = rng.next();
            mpz_import(limb.get_mpz_t(), 1, -1, sizeof(uint64_t), 0, 0, &v);
            c += limb;
        }
        if (rng.next() & 1) c = -c;
        if (c == 0) c = 1;
        out.push_back(Term{ea, eb, ec, c});
    }
    return HomoPoly::from_terms(std::move(out));
}

}  // namespace

TEST_CASE("construction and normalization") {
    auto f = HomoPoly::from_terms({Term{1, 0, 0, 2}, Term{0, 1, 0, 3}, Term{1, 0, 0, -2}});
    CHECK(f.term_count() == 1);
    CHECK(f.to_string() == "3*b");
    CHECK(HomoPoly::zero().is_zero());
    CHECK(HomoPoly::constant(0).is_zero());
    CHECK_THROWS_AS(HomoPoly::zero().degree(), elab::ZeroPolyError);
    CHECK_THROWS_AS(HomoPoly::from_terms({Term{1, 0, 0, 1}, Term{0, 2, 0, 1}}), elab::NotHomogeneous);
}

TEST_CASE("sum difference and degree mismatch") {
    auto f = A() + C();
    auto g = A() - C();
    CHECK(f.degree() == 1);
    CHECK((f - f).is_zero());
    CHECK_THROWS_AS(f + HomoPoly::mul(f, f), elab::NotHomogeneous);
    auto h = HomoPoly::mul(f, g);
    CHECK(h.to_string() == "a^2 - c^2");
}

TEST_CASE("square of the first iterate polynomial") {
    // (a^3 + c^3 - a^2 b)^2 expands to six terms
    auto p1 = HomoPoly::pow(A(), 3) + HomoPoly::pow(C(), 3) - HomoPoly::mul(HomoPoly::pow(A(), 2), B());
    auto sq = HomoPoly::mul(p1, p1);
    CHECK(sq.term_count() == 6);
    CHECK(sq.to_string() == "a^6 - 2*a^5*b + a^4*b^2 + 2*a^3*c^3 - 2*a^2*b*c^3 + c^6");
    std::vector<int> coefs;
    for (const Term& t : sq.terms()) coefs.push_back(static_cast<int>(t.coef.get_si()));
    std::sort(coefs.begin(), coefs.end());
    CHECK(coefs == std::vector<int>{-2, -2, 1, 1, 1, 2});
}

TEST_CASE("substitution is composition") {
    // images of the variables under the shift map for k=2
    auto p1 = HomoPoly::pow(A(), 3) + HomoPoly::pow(C(), 3) - HomoPoly::mul(HomoPoly::pow(A(), 2), B());
    auto gb = HomoPoly::monomial(1, 3, 0, 0);  // a^3
    auto gc = HomoPoly::monomial(1, 2, 0, 1);  // a^2 c
    auto img_a = HomoPoly::substitute(A(), p1, gb, gc);
    CHECK(img_a == p1);
    auto img_c = HomoPoly::substitute(C(), p1, gb, gc);
    CHECK(img_c == gc);

    // spot check against direct evaluation at rational points
    auto f = HomoPoly::mul(p1, p1) + HomoPoly::mul(HomoPoly::pow(A(), 3), HomoPoly::mul(B(), HomoPoly::mul(C(), C())));
    auto sub = HomoPoly::substitute(f, p1, gb, gc);
    mpq_class av(3, 5), bv(-2, 7), cv(1, 2);
    mpq_class ea = p1.eval_q(av, bv, cv);
    mpq_class eb = gb.eval_q(av, bv, cv);
    mpq_class ec = gc.eval_q(av, bv, cv);
    CHECK(sub.eval_q(av, bv, cv) == f.eval_q(ea, eb, ec));
    CHECK_THROWS_AS(HomoPoly::substitute(f, p1, p1, gc), elab::SubstitutionError);
}

TEST_CASE("exact division") {
    auto f = HomoPoly::mul(A() + C(), A() - C());
    CHECK(HomoPoly::divide_exact(f, A() - C()) == A() + C());
    auto g = HomoPoly::pow(A(), 2) + HomoPoly::pow(C(), 2);
    CHECK_THROWS_AS(HomoPoly::divide_exact(g, A() + C()), elab::NotDivisible);
    // monomial path
    auto m = HomoPoly::monomial(2, 1, 0, 1);
    auto fm = HomoPoly::mul(f, m);
    CHECK(HomoPoly::divide_exact(fm, m) == f);
    CHECK_THROWS_AS(HomoPoly::divide_exact(f, HomoPoly::zero()), elab::ZeroPolyError);
    CHECK_THROWS_AS(HomoPoly::divide_exact(HomoPoly::mul(f, HomoPoly::constant(3)), HomoPoly::constant(2)),
                    elab::NotDivisible);
}

TEST_CASE("division with remainder") {
    auto [q, r] = HomoPoly::divrem(HomoPoly::pow(A() + C(), 2), A() + C());
    CHECK(q == A() + C());
    CHECK(r.is_zero());
    auto [q2, r2] = HomoPoly::divrem(HomoPoly::pow(A(), 2) + HomoPoly::pow(C(), 2), A() + C());
    CHECK(!r2.is_zero());
    CHECK(!q2.is_zero());
    // rational quotient is reported, not truncated
    CHECK_THROWS_AS(HomoPoly::divrem(HomoPoly::pow(A(), 2), A() + A()), elab::RingError);
}

TEST_CASE("kernel agreement on random operands") {
    elab::SplitMix64 rng(0x5eedf00du);
    for (int round = 0; round < 6; ++round) {
        auto f = random_homo(rng, 9 + round, 24, 96);
        auto g = random_homo(rng, 7 + round, 18, 96);
        auto s = HomoPoly::mul(f, g, MulKernel::Serial);
        auto o = HomoPoly::mul(f, g, MulKernel::Omp);
        auto p = HomoPoly::mul(f, g, MulKernel::Packed);
        CHECK(s == o);
        CHECK(s == p);
    }
}

TEST_CASE("packed kernel handles signed and huge coefficients") {
    elab::SplitMix64 rng(0xabcdef12u);
    auto f = random_homo(rng, 12, 40, 1024);
    auto g = random_homo(rng, 10, 30, 1024);
    CHECK(HomoPoly::mul(f, g, MulKernel::Serial) == HomoPoly::mul(f, g, MulKernel::Packed));
    // cancellation-heavy product
    auto h = HomoPoly::mul(f - f + f, g, MulKernel::Packed);
    auto d = HomoPoly::mul(f, g - g + g, MulKernel::Serial);
    CHECK(h == d);
}

TEST_CASE("product then exact division returns the factor") {
    elab::SplitMix64 rng(0x77777777u);
    for (int round = 0; round < 4; ++round) {
        auto f = random_homo(rng, 8, 20, 64);
        auto g = random_homo(rng, 6, 12, 64);
        auto prod = HomoPoly::mul(f, g);
        CHECK(HomoPoly::divide_exact(prod, g, MulKernel::Serial) == f);
        CHECK(HomoPoly::divide_exact(prod, f, MulKernel::Serial) == g);
        // modular reconstruction path on the same instances
        CHECK(HomoPoly::divide_exact(prod, g, MulKernel::Packed) == f);
    }
    // non-multiple through the modular path
    auto g2 = HomoPoly::pow(A(), 2) + HomoPoly::pow(C(), 2);
    CHECK_THROWS_AS(HomoPoly::divide_exact(g2, A() + C(), MulKernel::Packed), elab::NotDivisible);
}

TEST_CASE("orders shifts and specializations") {
    auto f = HomoPoly::mul(HomoPoly::pow(A(), 2), HomoPoly::pow(B(), 2)) +
             HomoPoly::mul(HomoPoly::pow(A(), 3), C());
    CHECK(f.ord_a() == 2);
    CHECK(f.ord_b() == 0);
    CHECK(f.ord_c() == 0);
    auto s = f.shift_down_a(2);
    CHECK(s == HomoPoly::mul(B(), B()) + HomoPoly::mul(A(), C()));
    CHECK_THROWS_AS(f.shift_down_a(3), elab::NotDivisible);
    auto p1 = HomoPoly::pow(A(), 3) + HomoPoly::pow(C(), 3) - HomoPoly::mul(HomoPoly::pow(A(), 2), B());
    CHECK(p1.at_a_zero() == HomoPoly::pow(C(), 3));
    CHECK(p1.ord_a() == 0);
    CHECK(f.content() == 1);
    CHECK((HomoPoly::constant(6) + HomoPoly::constant(4)).content() == 10);
}

TEST_CASE("modular evaluation agrees with rational evaluation") {
    elab::SplitMix64 rng(0x13572468u);
    auto f = random_homo(rng, 7, 15, 40);
    uint64_t p = elab::nth_prime(0);
    uint64_t av = 12345, bv = 67890, cv = 424242;
    uint64_t direct = f.eval_modp(av, bv, cv, p);
    mpq_class exact = f.eval_q(mpq_class(static_cast<unsigned long>(av)), mpq_class(static_cast<unsigned long>(bv)),
                               mpq_class(static_cast<unsigned long>(cv)));
    mpz_class num = exact.get_num();
    uint64_t expect = mpz_fdiv_ui(num.get_mpz_t(), p);
    CHECK(direct == expect);

    auto dense = f.univariate_in_a_modp(bv, cv, p);
    uint64_t horner = 0;
    for (auto it = dense.rbegin(); it != dense.rend(); ++it) horner = elab::addmod(elab::mulmod(horner, av, p), *it, p);
    CHECK(horner == direct);
    auto dense_b = f.univariate_in_b_modp(av, cv, p);
    uint64_t horner_b = 0;
    for (auto it = dense_b.rbegin(); it != dense_b.rend(); ++it)
        horner_b = elab::addmod(elab::mulmod(horner_b, bv, p), *it, p);
    CHECK(horner_b == direct);
}

TEST_CASE("canonical text round trip") {
    elab::SplitMix64 rng(0x2468aceu);
    for (int round = 0; round < 8; ++round) {
        auto f = random_homo(rng, 6, 10, 80);
        CHECK(HomoPoly::parse(f.to_string()) == f);
    }
    CHECK(HomoPoly::parse("0").is_zero());
    CHECK(HomoPoly::zero().to_string() == "0");
    auto p1 = HomoPoly::parse("a^3 - a^2*b + c^3");
    CHECK(p1.to_string() == "a^3 - a^2*b + c^3");
    CHECK(p1.term_count() == 3);
    CHECK(HomoPoly::parse("-2*a*b + b^2 + a^2").to_string() == "a^2 - 2*a*b + b^2");
}

TEST_CASE("pow matches repeated multiplication") {
    auto base = A() + B() + C();
    auto five = HomoPoly::pow(base, 5);
    CHECK(five.term_count() == 21);
    auto by_hand = base;
    for (int i = 1; i < 5; ++i) by_hand = HomoPoly::mul(by_hand, base);
    CHECK(five == by_hand);
    CHECK(HomoPoly::pow(base, 0) == HomoPoly::constant(1));
    CHECK(HomoPoly::pow(HomoPoly::zero(), 3).is_zero());
}

TEST_CASE("thread count plumbing") {
    int prev = elab::set_poly_threads(2);
    CHECK(elab::poly_threads() == 2);
    elab::SplitMix64 rng(0x9999u);
    auto f = random_homo(rng, 10, 80, 64);
    auto g = random_homo(rng, 10, 80, 64);
    CHECK(HomoPoly::mul(f, g, MulKernel::Omp) == HomoPoly::mul(f, g, MulKernel::Serial));
    elab::set_poly_threads(prev);
}
