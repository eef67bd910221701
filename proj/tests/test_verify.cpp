#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "elab/common.hpp"
#include "elab/hvmap.hpp"
#include "elab/poly.hpp"
#include "elab/verify.hpp"

using namespace elab;
using namespace elab::verify;

namespace {

bool all_verified(const CheckReport& rep) {
    return !rep.instances.empty() &&
           std::all_of(rep.instances.begin(), rep.instances.end(),
                       [](const CheckInstance& i) { return i.outcome == Outcome::verified; });
}

const CheckInstance* find_instance(const CheckReport& rep, int n, int occurrence = 0) {
    int seen = 0;
    for (const auto& i : rep.instances) {
        if (i.n == n && seen++ == occurrence) return &i;
    }
    return nullptr;
}

}  // namespace

TEST_CASE("z exact window, k=3") {
    ZState st = z_state(3, 20);
    CHECK(st.exact[0] == 1);
    CHECK(st.exact[2] == 1);
    CHECK(st.exact[3] == -1);
    CHECK(st.exact[4] == 2);
    CHECK(st.exact[5] == 16);
    CHECK(st.exact[6] == -32768);
    CHECK(st.exact[7] == mpz_class(3) << 60);
    // signs follow the residue of n mod 3 out to the shadow horizon
    for (int n = 3; n <= 20; ++n) {
        CAPTURE(n);
        CHECK(st.sign[n] == (n % 3 == 0 ? -1 : 1));
    }
    // the two addends always share a sign, so the margin never escalates
    CHECK(st.escalated.empty());
    // shadow magnitude agrees with the exact window (mantissa/exponent split:
    // the later exact values overflow a plain double)
    for (int n = 4; n <= st.exact_max; ++n) {
        long e2 = 0;
        double mant = mpz_get_d_2exp(&e2, st.exact[n].get_mpz_t());
        double exact_log = std::log(std::fabs(mant)) + static_cast<double>(e2) * std::log(2.0);
        CHECK(std::fabs(static_cast<double>(st.log_mag[n]) - exact_log) < 1e-6 * std::max(1.0, exact_log));
    }
    // auxiliary signs at n=6: the pure product term is negative
    CHECK(st.aux_sign[3] == std::array<int, 3>{-1, 1, 1});
    CHECK(st.aux_sign[4] == std::array<int, 3>{1, -1, 1});
}

TEST_CASE("z exact window, k=5") {
    ZState st = z_state(5, 12);
    CHECK(st.exact[3] == -1);
    CHECK(st.exact[4] == 2);
    CHECK(st.exact[5] == 64);  // 2^{k+1}
    for (int n = 3; n <= 12; ++n) CHECK(st.sign[n] == (n % 3 == 0 ? -1 : 1));
    CHECK(st.escalated.empty());
}

TEST_CASE("z rejects the even family") {
    CHECK_THROWS_AS(z_state(2, 10), RingError);
    CHECK_THROWS_AS(z_state(1, 10), RingError);
}

TEST_CASE("z_signs report") {
    CheckReport rep = z_signs(3, 20);
    CHECK(rep.instances.size() == 18);
    CHECK(all_verified(rep));
    const CheckInstance* n5 = find_instance(rep, 5);
    REQUIRE(n5 != nullptr);
    CHECK(n5->evidence.find("2^{k+1}") != std::string::npos);

    CHECK(all_verified(z_signs(5, 12)));

    CheckReport even = z_signs(2, 10);
    REQUIRE(even.instances.size() == 1);
    CHECK(even.instances[0].outcome == Outcome::certificate_unknown);
}

TEST_CASE("ord_a across both families") {
    CheckReport r2 = check_ord_a(2, 1, 5);
    CHECK(r2.instances.size() == 5);
    CHECK(all_verified(r2));
    const CheckInstance* n3 = find_instance(r2, 3);
    REQUIRE(n3 != nullptr);
    CHECK(n3->evidence.find("ord_a=3") != std::string::npos);
    CHECK(n3->evidence.find("-c^24") != std::string::npos);
    const CheckInstance* n4 = find_instance(r2, 4);
    REQUIRE(n4 != nullptr);
    CHECK(n4->evidence.find("ord_a=8") != std::string::npos);

    CheckReport r3 = check_ord_a(3, 1, 4);
    CHECK(all_verified(r3));
    const CheckInstance* o4 = find_instance(r3, 4);
    REQUIRE(o4 != nullptr);
    CHECK(o4->evidence.find("ord_a=12") != std::string::npos);

    // past the exact-iteration ceiling the check reports unknown, not a crash
    CheckReport r7 = check_ord_a(7, 4, 4);
    REQUIRE(r7.instances.size() == 1);
    CHECK(r7.instances[0].outcome == Outcome::certificate_unknown);
}

TEST_CASE("unit factors") {
    CheckReport r2 = check_unit_factors(2, 1, 4);
    CHECK(r2.instances.size() == 4);
    CHECK(all_verified(r2));
    const CheckInstance* n1 = find_instance(r2, 1);
    REQUIRE(n1 != nullptr);
    CHECK(n1->evidence.find("1-b") != std::string::npos);
    const CheckInstance* n2 = find_instance(r2, 2);
    REQUIRE(n2 != nullptr);
    CHECK(n2->evidence.find("-b(1-b)^k") != std::string::npos);

    CHECK(all_verified(check_unit_factors(3, 1, 3)));
}

TEST_CASE("product identity") {
    CHECK(all_verified(check_product_identity(2, 1, 5)));
    CHECK(all_verified(check_product_identity(3, 1, 4)));
}

TEST_CASE("coprime certificate on chain entries") {
    CheckReport r2 = check_coprime(2, 1, 4);
    // consecutive pairs (1,2),(2,3),(3,4) and skip pairs (1,3),(2,4)
    CHECK(r2.instances.size() == 5);
    CHECK(all_verified(r2));

    CheckReport r3 = check_coprime(3, 0, 3);
    CHECK(r3.instances.size() == 6);  // all pairs over 0..3
    CHECK(all_verified(r3));
}

TEST_CASE("coprime certificate refuses a planted common factor") {
    HomoPoly h = HomoPoly::from_terms({Term{1, 0, 0, 1}, Term{0, 1, 0, 1}, Term{0, 0, 1, 1}});
    HomoPoly f = HomoPoly::from_terms({Term{2, 0, 0, 1}, Term{0, 2, 0, 1}});
    HomoPoly g = HomoPoly::from_terms({Term{0, 0, 2, 1}, Term{1, 1, 0, 1}});
    HomoPoly hf = HomoPoly::mul(h, f);
    HomoPoly hg = HomoPoly::mul(h, g);
    std::string ev;
    CHECK(coprime_certificate(hf, hg, 42, &ev) == Outcome::certificate_unknown);
    // and the factor-free pair certifies fine
    CHECK(coprime_certificate(f, g, 42) == Outcome::verified);
}

TEST_CASE("irreducibility certificates, k=2") {
    CheckReport rep = check_irreducible(2, 1, 5);
    CHECK(rep.instances.size() == 5);
    CHECK(all_verified(rep));
    // the n=5 witness is a degree-168 univariate image
    const CheckInstance* n5 = find_instance(rep, 5);
    REQUIRE(n5 != nullptr);
    CHECK(n5->evidence.find("degree 168") != std::string::npos);

    CheckReport odd = check_irreducible(3, 1, 3);
    REQUIRE(odd.instances.size() == 1);
    CHECK(odd.instances[0].outcome == Outcome::certificate_unknown);
}

TEST_CASE("irreducibility negative controls") {
    // (a+b)(a+c) is reducible: the certificate must never verify it
    HomoPoly u = HomoPoly::from_terms({Term{1, 0, 0, 1}, Term{0, 1, 0, 1}});
    HomoPoly v = HomoPoly::from_terms({Term{1, 0, 0, 1}, Term{0, 0, 1, 1}});
    std::string ev;
    CHECK(irreducible_certificate(HomoPoly::mul(u, v), 42, &ev) == Outcome::certificate_unknown);
    // nontrivial integer content is an exact disproof
    HomoPoly scaled = HomoPoly::from_terms({Term{1, 0, 0, 2}, Term{0, 1, 0, 2}});
    CHECK(irreducible_certificate(scaled, 42) == Outcome::violated);
    // an honest irreducible input certifies
    CHECK(irreducible_certificate(u, 42) == Outcome::verified);
}

TEST_CASE("congruence window classification, k=3") {
    CheckReport rep = check_congruences(3, 2, 6);
    // 4 instances per n: (first, m=1), (first, m=2), (second, m=1), (second, m=2)
    CHECK(rep.instances.size() == 20);

    // n=2: both moduli have negative index, everything is vacuous
    for (int occ = 0; occ < 4; ++occ) {
        const CheckInstance* i = find_instance(rep, 2, occ);
        REQUIRE(i != nullptr);
        CHECK(i->outcome == Outcome::verified);
        CHECK(i->evidence.find("vacuous") != std::string::npos);
    }
    // n=3: the first congruence has a live modulus but a degenerate bracket;
    // the second is still vacuous
    {
        const CheckInstance* first_m1 = find_instance(rep, 3, 0);
        REQUIRE(first_m1 != nullptr);
        CHECK(first_m1->outcome == Outcome::certificate_unknown);
        const CheckInstance* second_m1 = find_instance(rep, 3, 2);
        REQUIRE(second_m1 != nullptr);
        CHECK(second_m1->outcome == Outcome::verified);
        CHECK(second_m1->evidence.find("vacuous") != std::string::npos);
    }
    // n=4: both windows degenerate
    for (int occ = 0; occ < 4; ++occ) {
        const CheckInstance* i = find_instance(rep, 4, occ);
        REQUIRE(i != nullptr);
        CHECK(i->outcome == Outcome::certificate_unknown);
    }
    // n=5,6: certified
    for (int n = 5; n <= 6; ++n)
        for (int occ = 0; occ < 4; ++occ) {
            const CheckInstance* i = find_instance(rep, n, occ);
            REQUIRE(i != nullptr);
            CHECK(i->outcome == Outcome::verified);
            CHECK(i->evidence.find("divisible by the modulus blocks") != std::string::npos);
        }
    // the second congruence at n=5 is small enough for a concrete division
    for (int occ = 2; occ < 4; ++occ) {
        const CheckInstance* i = find_instance(rep, 5, occ);
        REQUIRE(i != nullptr);
        CHECK(i->evidence.find("concrete divide_exact") != std::string::npos);
    }
}

TEST_CASE("congruences at k=5 and on the even family") {
    CheckReport r5 = check_congruences(5, 5, 5);
    CHECK(r5.instances.size() == 4);
    CHECK(all_verified(r5));

    CheckReport r2 = check_congruences(2, 5, 6);
    REQUIRE(r2.instances.size() == 1);
    CHECK(r2.instances[0].outcome == Outcome::certificate_unknown);
}

TEST_CASE("gauge covariance, k=2") {
    CheckReport rep = check_gauge_covariance(2, 1, 5);
    CHECK(rep.instances.size() == 5);
    CHECK(all_verified(rep));
    // indices 1..3 carry the symbolic Laurent comparison
    for (int n = 1; n <= 3; ++n) {
        const CheckInstance* i = find_instance(rep, n);
        REQUIRE(i != nullptr);
        CHECK(i->evidence.find("symbolic Laurent match") != std::string::npos);
    }
    // every index is sampled numerically, mu = 1 included
    const CheckInstance* i5 = find_instance(rep, 5);
    REQUIRE(i5 != nullptr);
    CHECK(i5->evidence.find("point evaluations agree") != std::string::npos);

    CheckReport odd = check_gauge_covariance(3, 1, 3);
    REQUIRE(odd.instances.size() == 1);
    CHECK(odd.instances[0].outcome == Outcome::certificate_unknown);
}

TEST_CASE("suite runs clean and deterministically") {
    SuiteOptions opts;
    opts.ks = {2, 3};
    SuiteResult first = run_suite(opts);
    CHECK(!first.reports.empty());
    CHECK(!first.any_violated);
    // reports come back ordered by (check id, k)
    for (std::size_t i = 1; i < first.reports.size(); ++i) {
        auto key = [](const CheckReport& r) { return std::make_pair(r.check_id, r.k); };
        CHECK(key(first.reports[i - 1]) < key(first.reports[i]));
    }
    std::string jsonl = reports_jsonl(first.reports);
    std::string csv = reports_csv(first.reports);
    CHECK(jsonl.find("\"outcome\":\"violated\"") == std::string::npos);
    CHECK(csv.rfind("check,k,n_lo,n_hi,verified,certificate_unknown,violated\n", 0) == 0);

    SuiteResult second = run_suite(opts);
    CHECK(reports_jsonl(second.reports) == jsonl);
    CHECK(reports_csv(second.reports) == csv);
}

TEST_CASE("report serialization shape") {
    CheckReport rep;
    rep.check_id = "ord_a";
    rep.k = 2;
    rep.n_lo = 1;
    rep.n_hi = 2;
    CheckInstance a;
    a.check_id = "ord_a";
    a.k = 2;
    a.n = 1;
    a.outcome = Outcome::verified;
    a.evidence = "ok";
    a.millis = 1.25;
    CheckInstance b = a;
    b.n = 2;
    b.outcome = Outcome::certificate_unknown;
    b.evidence = "past ceiling";
    rep.instances = {a, b};
    std::vector<CheckReport> reps = {rep};

    CHECK(reports_jsonl(reps) ==
          "{\"check\":\"ord_a\",\"evidence\":\"ok\",\"k\":2,\"n\":1,\"outcome\":\"verified\"}\n"
          "{\"check\":\"ord_a\",\"evidence\":\"past ceiling\",\"k\":2,\"n\":2,"
          "\"outcome\":\"certificate_unknown\"}\n");
    CHECK(reports_csv(reps) ==
          "check,k,n_lo,n_hi,verified,certificate_unknown,violated\n"
          "ord_a,2,1,2,1,1,0\n");
    // timings are opt-in
    CHECK(reports_jsonl(reps, true).find("millis") != std::string::npos);
    CHECK(rep.any_unknown());
    CHECK(!rep.any_violated());
}
