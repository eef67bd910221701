#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "elab/sequences.hpp"

using namespace elab;
using namespace elab::seq;

namespace {

std::vector<long> longs(const std::vector<mpz_class>& v) {
    std::vector<long> out;
    for (const auto& x : v) out.push_back(x.get_si());
    return out;
}

mpq_class decimal_q(const std::string& digits, int places) {
    std::string clean;
    for (char ch : digits)
        if (ch != '.') clean += ch;
    mpz_class num(clean);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(places));
    return mpq_class(num) / mpq_class(den);
}

}  // namespace

TEST_CASE("a-exponent sequence, both parities") {
    CHECK(longs(beta_seq(2, 8).values) == std::vector<long>{1, 0, 0, 3, 8, 24, 72, 216, 648});
    CHECK(longs(beta_seq(3, 8).values) == std::vector<long>{1, 0, 0, 4, 12, 48, 196, 780, 3120});
    CHECK(longs(beta_seq(4, 6).values) == std::vector<long>{1, 0, 0, 5, 24, 120, 600});
    CHECK(longs(beta_seq(5, 6).values) == std::vector<long>{1, 0, 0, 6, 30, 180, 1086});
    // k=1 goes through the even branch
    CHECK(longs(beta_seq(1, 6).values) == std::vector<long>{1, 0, 0, 2, 3, 6, 12});
    // even-branch tail is geometric from n=6 on
    auto b6 = beta_seq(6, 10).values;
    for (int n = 6; n <= 10; ++n) CHECK(b6[n] == 7 * b6[n - 1]);
}

TEST_CASE("deconvolution sequence") {
    CHECK(longs(alpha_seq(2, 8).values) == std::vector<long>{0, 0, 0, 3, 8, 24, 63, 168, 440});
    CHECK(longs(alpha_seq(3, 8).values) == std::vector<long>{0, 0, 0, 4, 12, 48, 180, 684, 2592});
    // alpha_1 = alpha_2 = 0 for every k
    for (int k = 1; k <= 7; ++k) {
        auto a = alpha_seq(k, 2).values;
        CHECK(a[1] == 0);
        CHECK(a[2] == 0);
    }
}

TEST_CASE("competing bounds and the mod-3 classification") {
    // k=3 reference values
    std::vector<long> b2{12, 24, 48, 204, 792, 3120};
    std::vector<long> b3{12, 12, 60, 204, 780, 3132};
    std::vector<MinClass> cls{MinClass::strict,          MinClass::eq_beta_via_B3, MinClass::eq_beta_via_B2,
                              MinClass::strict,          MinClass::eq_beta_via_B3, MinClass::eq_beta_via_B2};
    for (int n = 3; n <= 8; ++n) {
        auto bb = b_bounds(3, n);
        CHECK(bb.b2 == b2[static_cast<std::size_t>(n - 3)]);
        CHECK(bb.b3 == b3[static_cast<std::size_t>(n - 3)]);
        CHECK(bb.min_class == cls[static_cast<std::size_t>(n - 3)]);
    }
    auto bb57 = b_bounds(5, 7);
    CHECK(bb57.b3 == 6510);
    CHECK(bb57.b2 == 6540);
    CHECK(bb57.min_class == MinClass::eq_beta_via_B3);  // n = 7 = 1 mod 3
    CHECK(beta_seq(5, 7).values[7] == 6510);
    CHECK_THROWS_AS(b_bounds(2, 5), RingError);
    CHECK_THROWS_AS(b_bounds(3, 2), RingError);
}

TEST_CASE("degree sequences, even branch") {
    auto pair2 = degree_seqs(2, 10);
    CHECK(pair2.st.label == "s");
    CHECK(longs(pair2.st.values) == std::vector<long>{1, 3, 9, 24, 64, 168, 441, 1155, 3025, 7920, 20736});
    CHECK(longs(pair2.d.values) == std::vector<long>{1, 3, 9, 25, 67, 177, 465, 1219, 3193, 8361, 21891});
    auto pair4 = degree_seqs(4, 8);
    CHECK(longs(pair4.st.values) == std::vector<long>{1, 5, 25, 120, 576, 2760, 13225, 63365, 303601});
    CHECK(longs(pair4.d.values) == std::vector<long>{1, 5, 25, 121, 581, 2785, 13345, 63941, 306361});
    auto pair1 = degree_seqs(1, 10);
    CHECK(longs(pair1.d.values) == std::vector<long>{1, 2, 4, 7, 11, 16, 22, 29, 37, 46, 56});
    auto pair6 = degree_seqs(6, 9);
    CHECK(longs(pair6.d.values) ==
          std::vector<long>{1, 7, 49, 337, 2311, 15841, 108577, 744199, 5100817, 34961521});
    // two expressions for d_n agree
    for (int k : {2, 4, 6}) {
        auto pr = degree_seqs(k, 9);
        for (int n = 3; n <= 9; ++n) {
            CHECK(pr.d.values[n] == pr.st.values[n] + pr.st.values[n - 3]);
            CHECK(pr.d.values[n] == 1 + k * (pr.st.values[n - 1] + pr.st.values[n - 2]));
        }
    }
}

TEST_CASE("degree sequences, odd branch") {
    auto pair3 = degree_seqs(3, 10);
    CHECK(pair3.st.label == "t");
    CHECK(longs(pair3.st.values) == std::vector<long>{1, 4, 16, 60, 228, 864, 3276, 12420, 47088, 178524, 676836});
    CHECK(longs(pair3.d.values) ==
          std::vector<long>{1, 4, 16, 61, 232, 880, 3337, 12652, 47968, 181861, 689488});
    auto pair5 = degree_seqs(5, 7);
    CHECK(longs(pair5.st.values) == std::vector<long>{1, 6, 36, 210, 1230, 7200, 42150, 246750});
    CHECK(longs(pair5.d.values) == std::vector<long>{1, 6, 36, 211, 1236, 7236, 42361, 247986});
    auto pair7 = degree_seqs(7, 10);
    CHECK(longs(pair7.d.values) == std::vector<long>{1, 8, 64, 505, 3984, 31424, 247857, 1954968, 15419776,
                                                     121623209, 959300896});
    for (int k : {3, 5, 7}) {
        auto pr = degree_seqs(k, 8);
        for (int n = 3; n <= 8; ++n) {
            CHECK(pr.st.values[n] == pr.d.values[n] - pr.d.values[n - 3]);
            CHECK(pr.d.values[n] == 1 + k * (pr.d.values[n - 1] + pr.d.values[n - 2]));
        }
    }
}

TEST_CASE("recurrence fitting finds the minimal order") {
    DegreeSeq geo{"custom", {1, 3, 9, 27, 81, 243}};
    auto rec = fit_recurrence(geo);
    CHECK(rec.order == 1);
    CHECK(rec.coefficients == std::vector<mpq_class>{3});

    for (int k : {2, 4, 6}) {
        auto pr = degree_seqs(k, 10);
        auto rd = fit_recurrence(pr.d);
        CHECK(rd.order == 3);
        CHECK(rd.coefficients == std::vector<mpq_class>{k + 2, -(k + 2), 1});
        auto rs = fit_recurrence(pr.st);
        CHECK(rs.order == 4);
        CHECK(rs.coefficients == std::vector<mpq_class>{k + 1, 0, -(k + 1), 1});
    }
    for (int k : {3, 5, 7}) {
        auto pr = degree_seqs(k, 10);
        auto rd = fit_recurrence(pr.d);
        CHECK(rd.order == 3);
        CHECK(rd.coefficients == std::vector<mpq_class>{k + 1, 0, -k});
        // t_2 breaks the weight-(k,k) pattern, so the minimal window-valid
        // fit is order 3 with a vanishing third tap
        auto rt = fit_recurrence(pr.st);
        CHECK(rt.order == 3);
        CHECK(rt.coefficients == std::vector<mpq_class>{k, k, 0});
    }

    DegreeSeq tiny{"custom", {1, 2}};
    CHECK_THROWS_AS(fit_recurrence(tiny), FitUnstable);
    // order-3 pattern with only 6 samples: the window is too short to trust
    DegreeSeq shortish{"custom", {1, 4, 16, 61, 232, 880}};
    CHECK_THROWS_AS(fit_recurrence(shortish), FitUnstable);
}

TEST_CASE("characteristic polynomial assembly") {
    LinearRecurrence rec;
    rec.order = 3;
    rec.coefficients = {4, -4, 1};
    auto cp = rec.char_poly();
    CHECK(cp == std::vector<mpz_class>{-1, 4, -4, 1});
    LinearRecurrence frac;
    frac.order = 2;
    frac.coefficients = {mpq_class(1, 2), mpq_class(1, 3)};
    CHECK(frac.char_poly() == std::vector<mpz_class>{-2, -3, 6});
}

TEST_CASE("dominant root enclosures") {
    // x^2 - 3x + 1 -> (3+sqrt(5))/2
    auto r1 = dominant_root_of({1, -3, 1}, 200);
    mpq_class golden = decimal_q("2.618033988749894848204587", 24);
    CHECK(abs((r1.lo_q() + r1.hi_q()) / 2 - golden) < mpq_class(1, mpz_class("1000000000000000000000")));
    // x - 3 -> exact 3
    auto r2 = dominant_root_of({-3, 1}, 64);
    CHECK(r2.lo_q() == 3);
    CHECK(r2.hi_q() == 3);
    // x^2 - 3x - 3 -> (3+sqrt(21))/2
    auto r3 = dominant_root_of({-3, -3, 1}, 200);
    mpq_class odd3 = decimal_q("3.791287847477920003294024", 24);
    CHECK(abs((r3.lo_q() + r3.hi_q()) / 2 - odd3) < mpq_class(1, mpz_class("1000000000000000000000")));
    // (x-1)^2 has the exact integer dominant root 1
    auto r4 = dominant_root_of({1, -2, 1}, 64);
    CHECK(r4.lo_q() == 1);
    CHECK(r4.hi_q() == 1);
    CHECK_THROWS_AS(dominant_root_of({1, 0, 1}, 64), RootNotFound);  // x^2 + 1
}

TEST_CASE("entropy closed forms") {
    auto e2 = entropy_closed(2);
    CHECK(e2.entropy.decimal(10) == "0.9624236501");
    CHECK(e2.entropy.decimal(24) == "0.962423650119206894995518");
    auto e3 = entropy_closed(3);
    CHECK(e3.entropy.decimal(10) == "1.3327057628");
    CHECK(e3.entropy.decimal(24) == "1.332705762820260385029651");
    auto e4 = entropy_closed(4);
    CHECK(e4.entropy.decimal(10) == "1.5667992370");
    CHECK(e4.entropy.decimal(24) == "1.566799236972411078664057");
    auto e1 = entropy_closed(1);
    CHECK(e1.entropy.lo_q() == 0);
    CHECK(e1.entropy.hi_q() == 0);
    CHECK(e1.root.lo_q() == 1);

    // char polys carried along
    CHECK(e2.char_poly == std::vector<mpz_class>{1, -3, 1});
    CHECK(e3.char_poly == std::vector<mpz_class>{-3, -3, 1});
}

TEST_CASE("fitted entropy agrees with the closed form") {
    for (int k = 1; k <= 7; ++k) {
        auto pr = degree_seqs(k, 10);
        auto fit = entropy_fitted(pr.d, 200);
        auto closed = entropy_closed(k, 200);
        mpq_class gap = abs((fit.entropy.lo_q() + fit.entropy.hi_q()) / 2 -
                            (closed.entropy.lo_q() + closed.entropy.hi_q()) / 2);
        CHECK(gap < mpq_class(1, mpz_class("10000000000000000000000000000000000000000")));
        CHECK(fit.source == EntropySource::fitted);
    }
}

TEST_CASE("entropy ordering properties") {
    DyadicInterval prev_ln(0, 0, 0);
    for (int k = 1; k <= 12; ++k) {
        auto cl = entropy_closed(k, 200);
        DyadicInterval lnk = DyadicInterval::exact_int(k).ln(200);
        // entropy >= ln k, interval-certified
        CHECK(cl.entropy.hi_q() >= lnk.lo_q());
        CHECK(cl.entropy.lo_q() >= lnk.lo_q() - mpq_class(1, mpz_class("100000000000000000000")));
        // even formula strictly below odd formula at the same k
        auto ev = entropy_formula(k, true, 200);
        auto od = entropy_formula(k, false, 200);
        CHECK(ev.entropy.hi_q() < od.entropy.lo_q());
    }
}

TEST_CASE("json serialization") {
    auto pr = degree_seqs(2, 4);
    auto js = seq_to_json(pr.d, 2);
    CHECK(js == R"({"k":2,"label":"d","values":["1","3","9","25","67"]})");
    auto rec = fit_recurrence(degree_seqs(3, 10).d);
    auto rj = recurrence_to_json(rec, "d", 3);
    CHECK(rj.find("\"order\":3") != std::string::npos);
    CHECK(rj.find("\"coefficients\":[\"4\",\"0\",\"-3\"]") != std::string::npos);
}
