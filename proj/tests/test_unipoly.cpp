#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "elab/modp.hpp"
#include "elab/rng.hpp"
#include "elab/unipoly.hpp"

using namespace elab;
using namespace elab::upoly;

namespace {

UPoly random_poly(SplitMix64& rng, int deg, uint64_t p) {
    UPoly f(static_cast<std::size_t>(deg) + 1);
    for (auto& c : f) c = rng.below(p);
    if (f.back() == 0) f.back() = 1;
    return f;
}

}  // namespace

TEST_CASE("kronecker multiplication agrees with schoolbook") {
    uint64_t p = nth_prime(0);
    SplitMix64 rng(42);
    for (int round = 0; round < 4; ++round) {
        auto f = random_poly(rng, 300 + 97 * round, p);
        auto g = random_poly(rng, 257 + 31 * round, p);
        CHECK(mul(f, g, p) == mul_school(f, g, p));
    }
}

TEST_CASE("division with remainder reconstructs the operands") {
    uint64_t p = nth_prime(1);
    SplitMix64 rng(7);
    // small instance goes through the schoolbook path
    {
        auto g = random_poly(rng, 9, p);
        auto q = random_poly(rng, 6, p);
        auto r = random_poly(rng, 5, p);
        auto f = add(mul(q, g, p), r, p);
        auto [qq, rr] = divrem(f, g, p);
        CHECK(qq == q);
        CHECK(rr == r);
    }
    // large instance goes through the Newton path
    {
        auto g = random_poly(rng, 700, p);
        auto q = random_poly(rng, 2100, p);
        auto r = random_poly(rng, 699, p);
        auto f = add(mul(q, g, p), r, p);
        auto [qq, rr] = divrem(f, g, p);
        CHECK(qq == q);
        CHECK(rr == r);
    }
    // exact multiple has zero remainder
    {
        auto g = random_poly(rng, 40, p);
        auto q = random_poly(rng, 33, p);
        auto [qq, rr] = divrem(mul(q, g, p), g, p);
        CHECK(qq == q);
        CHECK(is_zero(rr));
    }
}

TEST_CASE("gcd of products with a planted common factor") {
    uint64_t p = nth_prime(2);
    UPoly w{p - 1, 1};               // x - 1
    UPoly u{1, 0, 1};                // x^2 + 1
    UPoly v{3, 1};                   // x + 3
    auto g = mul(u, w, p);
    auto h = mul(v, w, p);
    auto d = gcd(g, h, p);
    CHECK(d == w);  // already monic
    // coprime pair
    auto one = gcd(u, v, p);
    CHECK(deg(one) == 0);
}

TEST_CASE("modular exponentiation of x") {
    uint64_t p = nth_prime(0);
    UPoly f{p - 1, p - 1, 1};  // x^2 - x - 1
    auto direct = UPoly{0, 1};
    for (int i = 0; i < 29; ++i) direct = rem(mul(direct, UPoly{0, 1}, p), f, p);
    CHECK(x_powmod(30, f, p) == direct);
}

TEST_CASE("polynomial composition modulo f") {
    uint64_t p = nth_prime(3);
    UPoly f{p - 2, 0, 0, 1};  // x^3 - 2
    UPoly g{1, 0, 1};         // x^2 + 1
    UPoly h{2, 1};            // x + 2
    // (x+2)^2 + 1 = x^2 + 4x + 5
    CHECK(compose_mod(g, h, f, p) == UPoly{5, 4, 1});
}

TEST_CASE("irreducibility over the word-size primes") {
    uint64_t p = nth_prime(0);
    REQUIRE(p % 4 == 3);
    CHECK(irreducible(UPoly{1, 0, 1}, p));       // x^2 + 1, p = 3 mod 4
    CHECK(irreducible(UPoly{p - 3, 1}, p));      // x - 3
    CHECK(!irreducible(UPoly{p - 1, 0, 1}, p));  // (x-1)(x+1)
    auto prod = mul(UPoly{1, 0, 1}, UPoly{p - 3, 1}, p);
    CHECK(!irreducible(prod, p));
}

TEST_CASE("cubic irreducibility matches the root count oracle") {
    uint64_t p = 101;
    SplitMix64 rng(99);
    for (int round = 0; round < 200; ++round) {
        UPoly f{rng.below(p), rng.below(p), rng.below(p), 1};
        bool has_root = false;
        for (uint64_t x = 0; x < p && !has_root; ++x)
            if (eval(f, x, p) == 0) has_root = true;
        // a cubic is reducible over F_p exactly when it has a root
        CHECK(irreducible(f, p) == !has_root);
    }
}
