#include "elab/sequences.hpp"

#include <algorithm>

#include "json.hpp"

namespace elab::seq {

namespace {

mpz_class clear_denominators(const std::vector<mpq_class>& v, std::vector<mpz_class>& out) {
    mpz_class lcm = 1;
    for (const auto& q : v) {
        mpz_class den = q.get_den();
        mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), den.get_mpz_t());
    }
    out.clear();
    out.reserve(v.size());
    for (const auto& q : v) out.push_back(mpz_class(q.get_num() * (lcm / q.get_den())));
    return lcm;
}

}  // namespace

std::vector<mpz_class> LinearRecurrence::char_poly() const {
    // x^m - c_1 x^{m-1} - ... - c_m, denominators cleared
    std::vector<mpz_class> cleared;
    mpz_class lead = clear_denominators(coefficients, cleared);
    std::vector<mpz_class> poly(static_cast<std::size_t>(order) + 1);
    poly[static_cast<std::size_t>(order)] = lead;
    for (int i = 1; i <= order; ++i) poly[static_cast<std::size_t>(order - i)] = -cleared[static_cast<std::size_t>(i - 1)];
    return poly;
}

DegreeSeq beta_seq(int k, int n_max) {
    DegreeSeq out{"beta", {}};
    auto& b = out.values;
    b.assign(static_cast<std::size_t>(n_max) + 1, 0);
    if (n_max >= 0) b[0] = 1;
    // b[1] = b[2] = 0 already
    bool even_branch = (k % 2 == 0) || k == 1;
    for (int n = 3; n <= n_max; ++n) {
        if (even_branch) {
            if (n == 3) {
                b[3] = k + 1;
            } else {
                mpz_class v = k;
                v *= k + 2;
                for (int i = 0; i < n - 4; ++i) v *= k + 1;
                b[static_cast<std::size_t>(n)] = v;
            }
        } else {
            b[static_cast<std::size_t>(n)] = k * (b[static_cast<std::size_t>(n - 1)] + b[static_cast<std::size_t>(n - 2)]) +
                                             (k + 1) * b[static_cast<std::size_t>(n - 3)];
        }
    }
    return out;
}

DegreeSeq alpha_seq(int k, int n_max) {
    auto beta = beta_seq(k, n_max).values;
    DegreeSeq out{"alpha", {}};
    auto& a = out.values;
    a.assign(static_cast<std::size_t>(n_max) + 1, 0);
    // alpha_0 is not used; alpha_1 = 0
    for (int n = 2; n <= n_max; ++n) {
        mpz_class conv = 0;
        for (int j = 1; j < n; ++j) conv += beta[static_cast<std::size_t>(n - j)] * a[static_cast<std::size_t>(j)];
        a[static_cast<std::size_t>(n)] = beta[static_cast<std::size_t>(n)] - conv;
    }
    return out;
}

BBounds b_bounds(int k, int n) {
    if (k % 2 == 0 || k < 3) throw RingError("bounds are defined for odd k >= 3");
    if (n < 3) throw RingError("bounds are defined for n >= 3");
    auto beta = beta_seq(k, n).values;
    mpz_class tail2 = 0, tail3 = 0;
    for (int j = 0; j <= n - 3; ++j) tail2 += beta[static_cast<std::size_t>(j)];
    for (int j = 0; j <= n - 2; ++j) tail3 += beta[static_cast<std::size_t>(j)];
    BBounds out;
    out.b2 = k * beta[static_cast<std::size_t>(n - 1)] + k * (k + 1) * tail2;
    out.b3 = k * (k + 1) * tail3;
    const mpz_class& bn = beta[static_cast<std::size_t>(n)];
    if (bn == out.b3 && out.b3 < out.b2) {
        out.min_class = MinClass::eq_beta_via_B3;
    } else if (bn == out.b2 && out.b2 < out.b3) {
        out.min_class = MinClass::eq_beta_via_B2;
    } else {
        out.min_class = MinClass::strict;
    }
    return out;
}

DegreePair degree_seqs(int k, int n_max) {
    DegreePair out;
    bool even_branch = (k % 2 == 0) || k == 1;
    auto& d = out.d.values;
    out.d.label = "d";
    if (even_branch) {
        out.st.label = "s";
        auto& s = out.st.values;
        s.assign(static_cast<std::size_t>(n_max) + 1, 0);
        if (n_max >= 0) s[0] = 1;
        if (n_max >= 1) s[1] = k + 1;
        if (n_max >= 2) s[2] = mpz_class(k + 1) * (k + 1);
        for (int n = 3; n <= n_max; ++n)
            s[static_cast<std::size_t>(n)] = k * (s[static_cast<std::size_t>(n - 1)] + s[static_cast<std::size_t>(n - 2)]) -
                                             s[static_cast<std::size_t>(n - 3)] + 1;
        d.assign(static_cast<std::size_t>(n_max) + 1, 0);
        for (int n = 0; n <= n_max && n <= 2; ++n) d[static_cast<std::size_t>(n)] = s[static_cast<std::size_t>(n)];
        for (int n = 3; n <= n_max; ++n)
            d[static_cast<std::size_t>(n)] = s[static_cast<std::size_t>(n)] + s[static_cast<std::size_t>(n - 3)];
    } else {
        out.st.label = "t";
        d.assign(static_cast<std::size_t>(n_max) + 1, 0);
        if (n_max >= 0) d[0] = 1;
        if (n_max >= 1) d[1] = k + 1;
        if (n_max >= 2) d[2] = mpz_class(k + 1) * (k + 1);
        for (int n = 3; n <= n_max; ++n)
            d[static_cast<std::size_t>(n)] = (k + 1) * d[static_cast<std::size_t>(n - 1)] - k * d[static_cast<std::size_t>(n - 3)];
        auto& t = out.st.values;
        t.assign(static_cast<std::size_t>(n_max) + 1, 0);
        for (int n = 0; n <= n_max && n <= 2; ++n) t[static_cast<std::size_t>(n)] = d[static_cast<std::size_t>(n)];
        for (int n = 3; n <= n_max; ++n)
            t[static_cast<std::size_t>(n)] = d[static_cast<std::size_t>(n)] - d[static_cast<std::size_t>(n - 3)];
    }
    return out;
}

LinearRecurrence fit_recurrence(const DegreeSeq& seq) {
    const auto& v = seq.values;
    std::size_t n_vals = v.size();
    if (n_vals < 4) throw FitUnstable("sequence too short to fit");

    // Berlekamp-Massey over Q.  C(x) = 1 + C_1 x + ... annihilates the data:
    // v_n + sum_i C_i v_{n-i} = 0 for n >= L.
    std::vector<mpq_class> C{1}, B{1};
    std::size_t L = 0, m = 1;
    mpq_class b = 1;
    for (std::size_t n = 0; n < n_vals; ++n) {
        mpq_class delta = mpq_class(v[n]);
        for (std::size_t i = 1; i < C.size() && i <= n; ++i) delta += C[i] * mpq_class(v[n - i]);
        if (delta == 0) {
            ++m;
        } else if (2 * L <= n) {
            std::vector<mpq_class> T = C;
            mpq_class coef = delta / b;
            if (C.size() < B.size() + m) C.resize(B.size() + m, 0);
            for (std::size_t i = 0; i < B.size(); ++i) C[i + m] -= coef * B[i];
            L = n + 1 - L;
            B = std::move(T);
            b = delta;
            m = 1;
        } else {
            mpq_class coef = delta / b;
            if (C.size() < B.size() + m) C.resize(B.size() + m, 0);
            for (std::size_t i = 0; i < B.size(); ++i) C[i + m] -= coef * B[i];
            ++m;
        }
    }
    // 2L samples make the minimal recurrence unique; demand one confirming
    // extra sample beyond that before trusting the fit.
    if (n_vals < 2 * L + 1) throw FitUnstable("data window shorter than twice the fitted order plus one");

    LinearRecurrence rec;
    rec.order = static_cast<int>(L);
    rec.coefficients.reserve(L);
    for (std::size_t i = 1; i <= L; ++i) rec.coefficients.push_back(i < C.size() ? -C[i] : mpq_class(0));
    rec.constant = 0;
    return rec;
}

namespace {

int sign_at(const std::vector<mpz_class>& poly, const mpq_class& x) {
    mpq_class acc = 0;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) acc = acc * x + mpq_class(*it);
    return acc > 0 ? 1 : (acc < 0 ? -1 : 0);
}

}  // namespace

DyadicInterval dominant_root_of(const std::vector<mpz_class>& char_poly_le, long prec_bits) {
    std::vector<mpz_class> p = char_poly_le;
    while (!p.empty() && p.back() == 0) p.pop_back();
    if (p.size() < 2) throw RootNotFound("constant polynomial");
    if (p.back() < 0)
        for (auto& c : p) c = -c;

    // Cauchy bound: every root has |x| <= 1 + max|c_i| / lead
    mpz_class maxc = 0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) maxc = std::max(maxc, mpz_class(abs(p[i])));
    mpz_class bound = maxc / p.back() + 2;

    // scan integer steps downward for the topmost sign change; the
    // characteristic polynomials here have an isolated dominant real root
    long hi = bound.get_si();
    int sign_hi = sign_at(p, mpq_class(hi));
    for (long x = hi - 1; x >= 0; --x) {
        int s = sign_at(p, mpq_class(x));
        if (s == 0) {
            // exact integer root; it is the largest real root since no sign
            // change occurred above it
            return DyadicInterval::exact_int(mpz_class(x));
        }
        if (s != sign_hi && sign_hi != 0) {
            // bisect [x, x+1]; midpoints stay dyadic so the enclosure is exact
            mpq_class lo_q(x), hi_q(x + 1);
            int sign_lo = s;
            for (long it = 0; it < prec_bits + 4; ++it) {
                mpq_class mid = (lo_q + hi_q) / 2;
                int sm = sign_at(p, mid);
                if (sm == 0) return DyadicInterval::from_dyadic(mid);
                if (sm == sign_lo)
                    lo_q = mid;
                else
                    hi_q = mid;
            }
            return DyadicInterval::from_dyadic(lo_q).hull(DyadicInterval::from_dyadic(hi_q));
        }
        sign_hi = s;
    }
    throw RootNotFound("no positive real root below the Cauchy bound");
}

DyadicInterval dominant_root(const LinearRecurrence& rec, long prec_bits) {
    return dominant_root_of(rec.char_poly(), prec_bits);
}

EntropyResult entropy_formula(int k, bool even_branch, long prec_bits) {
    if (k < 1) throw RingError("k must be at least 1");
    EntropyResult out;
    out.source = EntropySource::closed_form;
    if (even_branch) {
        // lambda = ln[(k+1+sqrt((k-1)(k+3)))/2], char factor x^2-(k+1)x+1
        out.char_poly = {1, -(k + 1), 1};
        mpz_class inner = mpz_class(k - 1) * (k + 3);
        DyadicInterval s = DyadicInterval::exact_int(inner).sqrt(prec_bits + 16);
        out.root = (s + DyadicInterval::exact_int(k + 1)).halved();
    } else {
        // lambda = ln[(k+sqrt(k(k+4)))/2], char factor x^2-kx-k
        out.char_poly = {-k, -k, 1};
        mpz_class inner = mpz_class(k) * (k + 4);
        DyadicInterval s = DyadicInterval::exact_int(inner).sqrt(prec_bits + 16);
        out.root = (s + DyadicInterval::exact_int(k)).halved();
    }
    out.entropy = out.root.ln(prec_bits);
    return out;
}

EntropyResult entropy_closed(int k, long prec_bits) {
    return entropy_formula(k, (k % 2 == 0) || k == 1, prec_bits);
}

EntropyResult entropy_fitted(const DegreeSeq& seq, long prec_bits) {
    LinearRecurrence rec = fit_recurrence(seq);
    EntropyResult out;
    out.source = EntropySource::fitted;
    out.char_poly = rec.char_poly();
    out.root = dominant_root_of(out.char_poly, prec_bits + 16);
    out.entropy = out.root.ln(prec_bits);
    return out;
}

std::string seq_to_json(const DegreeSeq& seq, int k) {
    nlohmann::json j;
    j["label"] = seq.label;
    j["k"] = k;
    nlohmann::json vals = nlohmann::json::array();
    for (const auto& v : seq.values) vals.push_back(v.get_str());
    j["values"] = std::move(vals);
    return j.dump();
}

std::string recurrence_to_json(const LinearRecurrence& rec, const std::string& label, int k) {
    nlohmann::json j;
    j["label"] = label;
    j["k"] = k;
    j["order"] = rec.order;
    nlohmann::json coefs = nlohmann::json::array();
    for (const auto& c : rec.coefficients) coefs.push_back(c.get_str());
    j["coefficients"] = std::move(coefs);
    j["constant"] = rec.constant.get_str();
    nlohmann::json cp = nlohmann::json::array();
    for (const auto& c : rec.char_poly()) cp.push_back(c.get_str());
    j["char_poly"] = std::move(cp);
    return j.dump();
}

}  // namespace elab::seq
