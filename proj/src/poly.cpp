#include "elab/poly.hpp"

#include <gmp.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "elab/modp.hpp"
#include "elab/unipoly.hpp"

namespace elab {

namespace {

int g_threads = 1;

inline uint64_t term_key(uint32_t ea, uint32_t eb) { return (static_cast<uint64_t>(ea) << 32) | eb; }

inline bool term_before(const Term& x, const Term& y) {
    int dx = x.total_degree(), dy = y.total_degree();
    if (dx != dy) return dx > dy;
    if (x.ea != y.ea) return x.ea > y.ea;
    return x.eb > y.eb;
}

std::size_t ceil_log2(std::size_t v) {
    std::size_t b = 0;
    while ((std::size_t(1) << b) < v) ++b;
    return b;
}

}  // namespace

int set_poly_threads(int n) {
    int prev = g_threads;
    g_threads = n < 1 ? 1 : n;
    return prev;
}

int poly_threads() { return g_threads; }

HomoPoly HomoPoly::constant(const mpz_class& v) {
    HomoPoly r;
    if (v != 0) r.terms_.push_back(Term{0, 0, 0, v});
    return r;
}

HomoPoly HomoPoly::monomial(const mpz_class& coef, unsigned ea, unsigned eb, unsigned ec) {
    HomoPoly r;
    if (coef != 0) r.terms_.push_back(Term{ea, eb, ec, coef});
    return r;
}

HomoPoly HomoPoly::from_terms(std::vector<Term> terms) {
    std::sort(terms.begin(), terms.end(), term_before);
    HomoPoly r;
    r.terms_.reserve(terms.size());
    for (auto& t : terms) {
        if (t.coef == 0) continue;
        if (!r.terms_.empty() && r.terms_.back().ea == t.ea && r.terms_.back().eb == t.eb &&
            r.terms_.back().ec == t.ec) {
            r.terms_.back().coef += t.coef;
            if (r.terms_.back().coef == 0) r.terms_.pop_back();
        } else {
            r.terms_.push_back(std::move(t));
        }
    }
    if (!r.terms_.empty()) {
        int d = r.terms_.front().total_degree();
        for (const auto& t : r.terms_)
            if (t.total_degree() != d) throw NotHomogeneous();
    }
    return r;
}

int HomoPoly::degree() const {
    if (terms_.empty()) throw ZeroPolyError("degree of the zero polynomial");
    return terms_.front().total_degree();
}

bool HomoPoly::operator==(const HomoPoly& o) const {
    if (terms_.size() != o.terms_.size()) return false;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const Term& x = terms_[i];
        const Term& y = o.terms_[i];
        if (x.ea != y.ea || x.eb != y.eb || x.ec != y.ec || x.coef != y.coef) return false;
    }
    return true;
}

HomoPoly HomoPoly::operator-() const {
    HomoPoly r = *this;
    for (auto& t : r.terms_) t.coef = -t.coef;
    return r;
}

HomoPoly operator+(const HomoPoly& f, const HomoPoly& g) {
    if (f.is_zero()) return g;
    if (g.is_zero()) return f;
    if (f.degree() != g.degree()) throw NotHomogeneous("sum of polynomials of different degrees");
    HomoPoly r;
    r.terms_.reserve(f.terms_.size() + g.terms_.size());
    std::size_t i = 0, j = 0;
    while (i < f.terms_.size() || j < g.terms_.size()) {
        if (j >= g.terms_.size() || (i < f.terms_.size() && term_before(f.terms_[i], g.terms_[j]))) {
            r.terms_.push_back(f.terms_[i++]);
        } else if (i >= f.terms_.size() || term_before(g.terms_[j], f.terms_[i])) {
            r.terms_.push_back(g.terms_[j++]);
        } else {
            Term t = f.terms_[i++];
            t.coef += g.terms_[j++].coef;
            if (t.coef != 0) r.terms_.push_back(std::move(t));
        }
    }
    return r;
}

HomoPoly operator-(const HomoPoly& f, const HomoPoly& g) { return f + (-g); }

// ---------- multiplication kernels ----------

HomoPoly HomoPoly::mul_serial(const HomoPoly& f, const HomoPoly& g) {
    if (f.is_zero() || g.is_zero()) return zero();
    int d = f.degree() + g.degree();
    std::unordered_map<uint64_t, mpz_class> acc;
    acc.reserve(std::min<std::size_t>(f.terms_.size() * g.terms_.size(),
                                      static_cast<std::size_t>(d + 1) * static_cast<std::size_t>(d + 2) / 2) *
                    2 +
                16);
    for (const Term& tf : f.terms_) {
        for (const Term& tg : g.terms_) {
            uint64_t key = term_key(tf.ea + tg.ea, tf.eb + tg.eb);
            mpz_class& slot = acc[key];
            mpz_addmul(slot.get_mpz_t(), tf.coef.get_mpz_t(), tg.coef.get_mpz_t());
        }
    }
    HomoPoly r;
    r.terms_.reserve(acc.size());
    for (auto& [key, coef] : acc) {
        if (coef == 0) continue;
        uint32_t ea = static_cast<uint32_t>(key >> 32);
        uint32_t eb = static_cast<uint32_t>(key & 0xffffffffu);
        r.terms_.push_back(Term{ea, eb, static_cast<uint32_t>(d) - ea - eb, std::move(coef)});
    }
    std::sort(r.terms_.begin(), r.terms_.end(), term_before);
    return r;
}

HomoPoly HomoPoly::mul_omp(const HomoPoly& f, const HomoPoly& g) {
    if (f.is_zero() || g.is_zero()) return zero();
#ifndef _OPENMP
    return mul_serial(f, g);
#else
    int nt = std::max(1, g_threads);
    if (nt == 1 || f.terms_.size() < 64) return mul_serial(f, g);
    int d = f.degree() + g.degree();
    std::vector<std::unordered_map<uint64_t, mpz_class>> parts(static_cast<std::size_t>(nt));
#pragma omp parallel num_threads(nt)
    {
        int tid = omp_get_thread_num();
        auto& acc = parts[static_cast<std::size_t>(tid)];
        std::size_t lo = f.terms_.size() * static_cast<std::size_t>(tid) / static_cast<std::size_t>(nt);
        std::size_t hi = f.terms_.size() * static_cast<std::size_t>(tid + 1) / static_cast<std::size_t>(nt);
        for (std::size_t i = lo; i < hi; ++i) {
            const Term& tf = f.terms_[i];
            for (const Term& tg : g.terms_) {
                uint64_t key = term_key(tf.ea + tg.ea, tf.eb + tg.eb);
                mpz_class& slot = acc[key];
                mpz_addmul(slot.get_mpz_t(), tf.coef.get_mpz_t(), tg.coef.get_mpz_t());
            }
        }
    }
    // exact addition is order independent, so the merge is deterministic
    std::unordered_map<uint64_t, mpz_class> total;
    for (auto& part : parts) {
        if (total.empty()) {
            total = std::move(part);
            continue;
        }
        for (auto& [key, coef] : part) total[key] += coef;
    }
    HomoPoly r;
    r.terms_.reserve(total.size());
    for (auto& [key, coef] : total) {
        if (coef == 0) continue;
        uint32_t ea = static_cast<uint32_t>(key >> 32);
        uint32_t eb = static_cast<uint32_t>(key & 0xffffffffu);
        r.terms_.push_back(Term{ea, eb, static_cast<uint32_t>(d) - ea - eb, std::move(coef)});
    }
    std::sort(r.terms_.begin(), r.terms_.end(), term_before);
    return r;
#endif
}

namespace {

// Balanced-digit Kronecker packing.  A polynomial with product-degree D maps
// monomial (ea, eb) to slot ea + (D+1)*eb; each slot holds E bits where E is
// a multiple of 64, so packing is limb-aligned.

struct PackedLayout {
    uint64_t width = 0;       // D+1
    std::size_t slots = 0;    // width^2
    std::size_t slot_limbs = 0;
    std::size_t bits = 0;     // E
};

void pack_into(const HomoPoly& f, const PackedLayout& lay, mpz_class& out) {
    std::vector<mp_limb_t> pos(lay.slots * lay.slot_limbs, 0);
    std::vector<mp_limb_t> neg;
    bool has_neg = false;
    for (const Term& t : f.terms()) {
        if (t.coef < 0) {
            has_neg = true;
            break;
        }
    }
    if (has_neg) neg.assign(lay.slots * lay.slot_limbs, 0);
    for (const Term& t : f.terms()) {
        std::size_t slot = static_cast<std::size_t>(t.ea) + static_cast<std::size_t>(lay.width) * t.eb;
        mp_limb_t* dst = (t.coef < 0 ? neg.data() : pos.data()) + slot * lay.slot_limbs;
        std::size_t count = 0;
        mpz_export(dst, &count, -1, sizeof(mp_limb_t), 0, 0, t.coef.get_mpz_t());
    }
    mpz_class A, B;
    mpz_import(A.get_mpz_t(), pos.size(), -1, sizeof(mp_limb_t), 0, 0, pos.data());
    if (has_neg) {
        mpz_import(B.get_mpz_t(), neg.size(), -1, sizeof(mp_limb_t), 0, 0, neg.data());
        out = A - B;
    } else {
        out = A;
    }
}

HomoPoly unpack_from(const mpz_class& prod, const PackedLayout& lay, int degree) {
    bool negate = prod < 0;
    std::vector<mp_limb_t> buf(lay.slots * lay.slot_limbs + lay.slot_limbs, 0);
    std::size_t words = 0;
    if (prod != 0) mpz_export(buf.data(), &words, -1, sizeof(mp_limb_t), 0, 0, prod.get_mpz_t());

    std::vector<Term> terms;
    std::vector<mp_limb_t> win(lay.slot_limbs);
    mp_limb_t borrow = 0;
    for (std::size_t s = 0; s < lay.slots; ++s) {
        std::memcpy(win.data(), buf.data() + s * lay.slot_limbs, lay.slot_limbs * sizeof(mp_limb_t));
        mp_limb_t carry = mpn_add_1(win.data(), win.data(), static_cast<mp_size_t>(lay.slot_limbs), borrow);
        bool nonzero = false;
        for (std::size_t i = 0; i < lay.slot_limbs; ++i)
            if (win[i]) nonzero = true;
        mpz_class digit;
        if (carry) {
            // window + borrow == 2^E exactly: digit 0, borrow continues
            borrow = 1;
            continue;
        } else if (win[lay.slot_limbs - 1] >> 63) {
            // negative digit: magnitude 2^E - value
            mpn_neg(win.data(), win.data(), static_cast<mp_size_t>(lay.slot_limbs));
            mpz_import(digit.get_mpz_t(), lay.slot_limbs, -1, sizeof(mp_limb_t), 0, 0, win.data());
            digit = -digit;
            borrow = 1;
        } else {
            borrow = 0;
            if (!nonzero) continue;
            mpz_import(digit.get_mpz_t(), lay.slot_limbs, -1, sizeof(mp_limb_t), 0, 0, win.data());
        }
        if (digit == 0) continue;
        if (negate) digit = -digit;
        uint32_t ea = static_cast<uint32_t>(s % lay.width);
        uint32_t eb = static_cast<uint32_t>(s / lay.width);
        long ec = static_cast<long>(degree) - ea - eb;
        if (ec < 0) throw RingError("packed product has support outside the homogeneous simplex");
        terms.push_back(Term{ea, eb, static_cast<uint32_t>(ec), std::move(digit)});
    }
    if (borrow) throw RingError("packed decode ended with a pending borrow");
    return HomoPoly::from_terms(std::move(terms));
}

PackedLayout packed_layout(const HomoPoly& f, const HomoPoly& g) {
    PackedLayout lay;
    int d = f.degree() + g.degree();
    lay.width = static_cast<uint64_t>(d) + 1;
    lay.slots = static_cast<std::size_t>(lay.width) * lay.width;
    std::size_t e0 = f.max_coef_bits() + g.max_coef_bits() +
                     ceil_log2(std::min(f.term_count(), g.term_count()) + 1) + 2;
    lay.bits = ((e0 + 63) / 64) * 64;
    lay.slot_limbs = lay.bits / 64;
    return lay;
}

// per-operand packed buffer cap, in limbs (1 limb = 8 bytes)
constexpr std::size_t kPackedLimbCap = 140'000'000;

}  // namespace

HomoPoly HomoPoly::mul_packed(const HomoPoly& f, const HomoPoly& g) {
    if (f.is_zero() || g.is_zero()) return zero();
    PackedLayout lay = packed_layout(f, g);
    if (lay.slots * lay.slot_limbs > kPackedLimbCap)
        throw RingError("packed multiplication exceeds the memory ceiling");
    mpz_class A, B;
    pack_into(f, lay, A);
    pack_into(g, lay, B);
    mpz_class C = A * B;
    A = 0;
    B = 0;
    return unpack_from(C, lay, f.degree() + g.degree());
}

HomoPoly HomoPoly::mul(const HomoPoly& f, const HomoPoly& g, MulKernel kernel) {
    switch (kernel) {
        case MulKernel::Serial:
            return mul_serial(f, g);
        case MulKernel::Omp:
            return mul_omp(f, g);
        case MulKernel::Packed:
            return mul_packed(f, g);
        case MulKernel::Auto:
            break;
    }
    if (f.is_zero() || g.is_zero()) return zero();
    std::size_t pairs = f.terms_.size() * g.terms_.size();
    if (pairs < (std::size_t(1) << 17)) return mul_serial(f, g);
    PackedLayout lay = packed_layout(f, g);
    std::size_t dense = static_cast<std::size_t>(f.degree() + g.degree() + 1) *
                        static_cast<std::size_t>(f.degree() + g.degree() + 2) / 2;
    bool dense_enough = pairs > dense * 8;
    if (dense_enough && lay.slots * lay.slot_limbs <= kPackedLimbCap) return mul_packed(f, g);
    if (g_threads > 1) return mul_omp(f, g);
    return mul_serial(f, g);
}

HomoPoly HomoPoly::pow(const HomoPoly& f, unsigned e, MulKernel kernel) {
    if (e == 0) return constant(1);
    HomoPoly acc = constant(1);
    HomoPoly base = f;
    bool acc_is_one = true;
    while (true) {
        if (e & 1) {
            acc = acc_is_one ? base : mul(acc, base, kernel);
            acc_is_one = false;
        }
        e >>= 1;
        if (!e) break;
        base = mul(base, base, kernel);
    }
    return acc;
}

// ---------- division ----------

namespace {

bool monomial_divides(const Term& m, const Term& lt) {
    return m.ea >= lt.ea && m.eb >= lt.eb && m.ec >= lt.ec;
}

}  // namespace

HomoPoly HomoPoly::divide_small(const HomoPoly& f, const HomoPoly& g) {
    // classic sparse exact division; sound and complete over Z by the
    // lead-term argument
    std::map<uint64_t, mpz_class, std::greater<uint64_t>> live;
    int df = f.degree();
    for (const Term& t : f.terms()) live[term_key(t.ea, t.eb)] = t.coef;
    const Term& ltg = g.terms().front();
    std::vector<Term> q;
    while (!live.empty()) {
        auto it = live.begin();
        uint32_t ea = static_cast<uint32_t>(it->first >> 32);
        uint32_t eb = static_cast<uint32_t>(it->first & 0xffffffffu);
        Term lead{ea, eb, static_cast<uint32_t>(df) - ea - eb, it->second};
        if (!monomial_divides(lead, ltg)) throw NotDivisible();
        mpz_class qc, rc;
        mpz_tdiv_qr(qc.get_mpz_t(), rc.get_mpz_t(), lead.coef.get_mpz_t(), ltg.coef.get_mpz_t());
        if (rc != 0) throw NotDivisible("leading coefficient not divisible over Z");
        Term qt{lead.ea - ltg.ea, lead.eb - ltg.eb, lead.ec - ltg.ec, qc};
        for (const Term& tg : g.terms()) {
            uint64_t key = term_key(qt.ea + tg.ea, qt.eb + tg.eb);
            auto jt = live.find(key);
            if (jt == live.end()) {
                mpz_class v;
                mpz_mul(v.get_mpz_t(), qt.coef.get_mpz_t(), tg.coef.get_mpz_t());
                if (v != 0) live.emplace(key, -v);
            } else {
                mpz_submul(jt->second.get_mpz_t(), qt.coef.get_mpz_t(), tg.coef.get_mpz_t());
                if (jt->second == 0) live.erase(jt);
            }
        }
        q.push_back(std::move(qt));
    }
    return from_terms(std::move(q));
}

std::pair<HomoPoly, HomoPoly> HomoPoly::divrem(const HomoPoly& f, const HomoPoly& g) {
    if (g.is_zero()) throw ZeroPolyError("division by the zero polynomial");
    if (f.is_zero()) return {zero(), zero()};
    if (f.degree() < g.degree()) return {zero(), f};
    // rational interim arithmetic so the lead-term argument applies over Q;
    // a non-integral final answer is reported instead of silently truncated
    std::map<uint64_t, mpq_class, std::greater<uint64_t>> live;
    int df = f.degree();
    for (const Term& t : f.terms()) live[term_key(t.ea, t.eb)] = mpq_class(t.coef);
    const Term& ltg = g.terms().front();
    std::vector<std::pair<uint64_t, mpq_class>> q, r;
    while (!live.empty()) {
        auto it = live.begin();
        uint64_t lead_key = it->first;
        mpq_class lead_coef = std::move(it->second);
        live.erase(it);
        uint32_t ea = static_cast<uint32_t>(lead_key >> 32);
        uint32_t eb = static_cast<uint32_t>(lead_key & 0xffffffffu);
        Term lead{ea, eb, static_cast<uint32_t>(df) - ea - eb, 0};
        if (!monomial_divides(lead, ltg)) {
            r.emplace_back(lead_key, std::move(lead_coef));
            continue;
        }
        mpq_class qc = lead_coef / mpq_class(ltg.coef);
        uint32_t qea = lead.ea - ltg.ea, qeb = lead.eb - ltg.eb;
        for (std::size_t gi = 1; gi < g.terms().size(); ++gi) {
            const Term& tg = g.terms()[gi];
            uint64_t key = term_key(qea + tg.ea, qeb + tg.eb);
            mpq_class& slot = live[key];
            slot -= qc * mpq_class(tg.coef);
            if (slot == 0) live.erase(key);
        }
        q.emplace_back(term_key(qea, qeb), std::move(qc));
    }
    auto to_poly = [&](std::vector<std::pair<uint64_t, mpq_class>>& v, int deg) {
        std::vector<Term> out;
        out.reserve(v.size());
        for (auto& [key, c] : v) {
            if (c == 0) continue;
            if (c.get_den() != 1) throw RingError("division with remainder has a non-integral result");
            uint32_t ea = static_cast<uint32_t>(key >> 32);
            uint32_t eb = static_cast<uint32_t>(key & 0xffffffffu);
            out.push_back(Term{ea, eb, static_cast<uint32_t>(deg) - ea - eb, c.get_num()});
        }
        return from_terms(std::move(out));
    };
    return {to_poly(q, df - g.degree()), to_poly(r, df)};
}

namespace {

// One CRT ladder entry: balanced residue lift.
struct CrtState {
    mpz_class modulus = 1;
    std::unordered_map<uint64_t, mpz_class> value;  // slot -> balanced lift
};

bool crt_absorb(CrtState& st, const std::unordered_map<uint64_t, uint64_t>& res, uint64_t p) {
    // returns true if anything changed
    bool changed = false;
    mpz_class pz(static_cast<unsigned long>(0));
    mpz_import(pz.get_mpz_t(), 1, -1, sizeof(uint64_t), 0, 0, &p);
    mpz_class minv;
    if (mpz_invert(minv.get_mpz_t(), st.modulus.get_mpz_t(), pz.get_mpz_t()) == 0)
        throw RingError("CRT moduli not coprime");
    mpz_class new_mod = st.modulus * pz;
    mpz_class half = pz / 2;

    // union of supports
    for (const auto& [slot, r] : res) {
        (void)r;
        (void)st.value[slot];
    }
    for (auto& [slot, v] : st.value) {
        uint64_t r = 0;
        auto it = res.find(slot);
        if (it != res.end()) r = it->second;
        // t = (r - v) * minv mod p, balanced
        mpz_class rv(static_cast<unsigned long>(0));
        mpz_import(rv.get_mpz_t(), 1, -1, sizeof(uint64_t), 0, 0, &r);
        mpz_class diff = (rv - v) % pz;
        if (diff < 0) diff += pz;
        mpz_class t = (diff * minv) % pz;
        if (t > half) t -= pz;
        if (t != 0) {
            v += st.modulus * t;
            changed = true;
        }
    }
    st.modulus = new_mod;
    return changed;
}

}  // namespace

HomoPoly HomoPoly::divide_kronecker_crt(const HomoPoly& f, const HomoPoly& g) {
    int df = f.degree(), dg = g.degree();
    int dq = df - dg;
    uint64_t width = static_cast<uint64_t>(df) + 1;
    std::size_t len = static_cast<std::size_t>(width) * width;

    auto densify = [&](const HomoPoly& h, uint64_t p) {
        UPoly out(len, 0);
        for (const Term& t : h.terms()) {
            std::size_t idx = static_cast<std::size_t>(t.ea) + static_cast<std::size_t>(width) * t.eb;
            uint64_t r = mpz_fdiv_ui(t.coef.get_mpz_t(), p);
            out[idx] = addmod(out[idx], r, p);
        }
        upoly::trim(out);
        return out;
    };

    // top Kronecker slot of g over Z; a prime is usable only if the slot
    // survives reduction, otherwise the mod-p division says nothing about Z
    long gtop = -1;
    for (const Term& t : g.terms())
        gtop = std::max(gtop, static_cast<long>(t.ea) + static_cast<long>(width) * t.eb);

    PrimeStream primes;
    CrtState st;
    int stable_rounds = 0;
    int used = 0;
    while (used < 96) {
        uint64_t p = primes.next();
        UPoly gp = densify(g, p);
        if (upoly::deg(gp) != gtop) continue;  // lead vanished, bad prime
        UPoly fp = densify(f, p);
        auto [qp, rp] = upoly::divrem(fp, gp, p);
        if (!upoly::is_zero(rp)) throw NotDivisible("nonzero remainder modulo a good prime");
        std::unordered_map<uint64_t, uint64_t> res;
        res.reserve(qp.size());
        for (std::size_t i = 0; i < qp.size(); ++i)
            if (qp[i]) res[i] = qp[i];
        bool changed = crt_absorb(st, res, p);
        ++used;
        if (!changed && used >= 2) {
            if (++stable_rounds >= 1) {
                // candidate stabilized: verify unconditionally
                std::vector<Term> qt;
                bool shape_ok = true;
                for (const auto& [slot, v] : st.value) {
                    if (v == 0) continue;
                    uint32_t ea = static_cast<uint32_t>(slot % width);
                    uint32_t eb = static_cast<uint32_t>(slot / width);
                    long ec = static_cast<long>(dq) - ea - eb;
                    if (ec < 0) {
                        shape_ok = false;
                        break;
                    }
                    qt.push_back(Term{ea, eb, static_cast<uint32_t>(ec), v});
                }
                if (shape_ok) {
                    HomoPoly q;
                    try {
                        q = from_terms(std::move(qt));
                    } catch (const NotHomogeneous&) {
                        shape_ok = false;
                    }
                    if (shape_ok && !q.is_zero()) {
                        HomoPoly check = mul(q, g, MulKernel::Auto);
                        if (check == f) return q;
                    }
                }
                stable_rounds = 0;  // lift was wrong, keep absorbing primes
            }
        } else {
            stable_rounds = 0;
        }
    }
    throw NotDivisible("no stable quotient after the CRT budget");
}

HomoPoly HomoPoly::divide_exact(const HomoPoly& f, const HomoPoly& g, MulKernel kernel) {
    if (g.is_zero()) throw ZeroPolyError("division by the zero polynomial");
    if (f.is_zero()) return zero();
    if (f.degree() < g.degree()) throw NotDivisible("degree of dividend below divisor");

    if (g.term_count() == 1) {
        const Term& m = g.terms().front();
        std::vector<Term> out;
        out.reserve(f.term_count());
        for (const Term& t : f.terms()) {
            if (t.ea < m.ea || t.eb < m.eb || t.ec < m.ec) throw NotDivisible();
            mpz_class qc, rc;
            mpz_tdiv_qr(qc.get_mpz_t(), rc.get_mpz_t(), t.coef.get_mpz_t(), m.coef.get_mpz_t());
            if (rc != 0) throw NotDivisible("coefficient not divisible over Z");
            out.push_back(Term{t.ea - m.ea, t.eb - m.eb, t.ec - m.ec, std::move(qc)});
        }
        return from_terms(std::move(out));
    }

    if (kernel == MulKernel::Serial || kernel == MulKernel::Omp) return divide_small(f, g);
    if (kernel == MulKernel::Packed) return divide_kronecker_crt(f, g);

    // estimated quotient support
    int dq = f.degree() - g.degree();
    std::size_t quot_bound = static_cast<std::size_t>(dq + 1) * static_cast<std::size_t>(dq + 2) / 2;
    if (quot_bound * g.term_count() < (std::size_t(1) << 24)) return divide_small(f, g);
    return divide_kronecker_crt(f, g);
}

// ---------- substitution ----------

HomoPoly HomoPoly::substitute(const HomoPoly& f, const HomoPoly& ga, const HomoPoly& gb, const HomoPoly& gc,
                              MulKernel kernel) {
    if (gb.term_count() != 1 || gc.term_count() != 1)
        throw SubstitutionError("images of b and c must be monomials");
    if (f.is_zero()) return zero();
    const Term& mb = gb.terms().front();
    const Term& mc = gc.terms().front();

    // group terms by the a-exponent; terms_ is sorted so groups come out with
    // the highest a-power first
    std::vector<std::pair<uint32_t, std::vector<Term>>> groups;
    for (const Term& t : f.terms()) {
        mpz_class coef = t.coef;
        if (t.eb > 0 && mb.coef != 1) {
            mpz_class w;
            mpz_pow_ui(w.get_mpz_t(), mb.coef.get_mpz_t(), t.eb);
            coef *= w;
        }
        if (t.ec > 0 && mc.coef != 1) {
            mpz_class w;
            mpz_pow_ui(w.get_mpz_t(), mc.coef.get_mpz_t(), t.ec);
            coef *= w;
        }
        Term img{t.eb * mb.ea + t.ec * mc.ea, t.eb * mb.eb + t.ec * mc.eb, t.eb * mb.ec + t.ec * mc.ec,
                 std::move(coef)};
        if (groups.empty() || groups.back().first != t.ea) groups.emplace_back(t.ea, std::vector<Term>{});
        groups.back().second.push_back(std::move(img));
    }

    HomoPoly acc = zero();
    uint32_t cur = groups.front().first;
    std::size_t gi = 0;
    while (true) {
        if (gi < groups.size() && groups[gi].first == cur) {
            HomoPoly grp = from_terms(std::move(groups[gi].second));
            acc = acc.is_zero() ? grp : acc + grp;
            ++gi;
        }
        if (cur == 0) break;
        if (!acc.is_zero()) acc = mul(acc, ga, kernel);
        --cur;
    }
    return acc;
}

// ---------- inspection ----------

int HomoPoly::ord_a() const {
    if (terms_.empty()) throw ZeroPolyError("ord of the zero polynomial");
    uint32_t m = terms_.front().ea;
    for (const Term& t : terms_) m = std::min(m, t.ea);
    return static_cast<int>(m);
}

int HomoPoly::ord_b() const {
    if (terms_.empty()) throw ZeroPolyError("ord of the zero polynomial");
    uint32_t m = terms_.front().eb;
    for (const Term& t : terms_) m = std::min(m, t.eb);
    return static_cast<int>(m);
}

int HomoPoly::ord_c() const {
    if (terms_.empty()) throw ZeroPolyError("ord of the zero polynomial");
    uint32_t m = terms_.front().ec;
    for (const Term& t : terms_) m = std::min(m, t.ec);
    return static_cast<int>(m);
}

HomoPoly HomoPoly::shift_down_a(unsigned e) const {
    if (e == 0) return *this;
    HomoPoly r;
    r.terms_.reserve(terms_.size());
    for (const Term& t : terms_) {
        if (t.ea < e) throw NotDivisible("a-power larger than ord_a");
        r.terms_.push_back(Term{t.ea - e, t.eb, t.ec, t.coef});
    }
    return r;
}

HomoPoly HomoPoly::at_a_zero() const {
    HomoPoly r;
    for (const Term& t : terms_)
        if (t.ea == 0) r.terms_.push_back(t);
    return r;
}

mpq_class HomoPoly::eval_q(const mpq_class& a, const mpq_class& b, const mpq_class& c) const {
    mpq_class acc = 0;
    for (const Term& t : terms_) {
        mpq_class v(t.coef);
        for (uint32_t i = 0; i < t.ea; ++i) v *= a;
        for (uint32_t i = 0; i < t.eb; ++i) v *= b;
        for (uint32_t i = 0; i < t.ec; ++i) v *= c;
        acc += v;
    }
    return acc;
}

uint64_t HomoPoly::eval_modp(uint64_t a, uint64_t b, uint64_t c, uint64_t p) const {
    uint64_t acc = 0;
    for (const Term& t : terms_) {
        uint64_t v = mpz_fdiv_ui(t.coef.get_mpz_t(), p);
        v = mulmod(v, powmod(a, t.ea, p), p);
        v = mulmod(v, powmod(b, t.eb, p), p);
        v = mulmod(v, powmod(c, t.ec, p), p);
        acc = addmod(acc, v, p);
    }
    return acc;
}

namespace {

std::vector<uint64_t> power_table(uint64_t x, uint32_t max_e, uint64_t p) {
    std::vector<uint64_t> tab(static_cast<std::size_t>(max_e) + 1);
    tab[0] = 1 % p;
    for (uint32_t i = 1; i <= max_e; ++i) tab[i] = mulmod(tab[i - 1], x, p);
    return tab;
}

}  // namespace

std::vector<uint64_t> HomoPoly::univariate_in_a_modp(uint64_t b0, uint64_t c0, uint64_t p) const {
    if (terms_.empty()) return {};
    uint32_t meb = 0, mec = 0, mea = 0;
    for (const Term& t : terms_) {
        meb = std::max(meb, t.eb);
        mec = std::max(mec, t.ec);
        mea = std::max(mea, t.ea);
    }
    auto bt = power_table(b0 % p, meb, p);
    auto ct = power_table(c0 % p, mec, p);
    std::vector<uint64_t> out(static_cast<std::size_t>(mea) + 1, 0);
    for (const Term& t : terms_) {
        uint64_t v = mpz_fdiv_ui(t.coef.get_mpz_t(), p);
        v = mulmod(v, mulmod(bt[t.eb], ct[t.ec], p), p);
        out[t.ea] = addmod(out[t.ea], v, p);
    }
    while (!out.empty() && out.back() == 0) out.pop_back();
    return out;
}

std::vector<uint64_t> HomoPoly::univariate_in_b_modp(uint64_t a0, uint64_t c0, uint64_t p) const {
    if (terms_.empty()) return {};
    uint32_t meb = 0, mec = 0, mea = 0;
    for (const Term& t : terms_) {
        meb = std::max(meb, t.eb);
        mec = std::max(mec, t.ec);
        mea = std::max(mea, t.ea);
    }
    auto at = power_table(a0 % p, mea, p);
    auto ct = power_table(c0 % p, mec, p);
    std::vector<uint64_t> out(static_cast<std::size_t>(meb) + 1, 0);
    for (const Term& t : terms_) {
        uint64_t v = mpz_fdiv_ui(t.coef.get_mpz_t(), p);
        v = mulmod(v, mulmod(at[t.ea], ct[t.ec], p), p);
        out[t.eb] = addmod(out[t.eb], v, p);
    }
    while (!out.empty() && out.back() == 0) out.pop_back();
    return out;
}

mpz_class HomoPoly::content() const {
    mpz_class g = 0;
    for (const Term& t : terms_) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), t.coef.get_mpz_t());
        if (g == 1) break;
    }
    return g;
}

std::size_t HomoPoly::max_coef_bits() const {
    std::size_t m = 1;
    for (const Term& t : terms_) m = std::max(m, mpz_sizeinbase(t.coef.get_mpz_t(), 2));
    return m;
}

int HomoPoly::max_ea() const {
    int m = 0;
    for (const Term& t : terms_) m = std::max(m, static_cast<int>(t.ea));
    return m;
}

int HomoPoly::max_eb() const {
    int m = 0;
    for (const Term& t : terms_) m = std::max(m, static_cast<int>(t.eb));
    return m;
}

// ---------- canonical text ----------

std::string HomoPoly::to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const Term& t : terms_) {
        mpz_class mag = abs(t.coef);
        bool neg = t.coef < 0;
        if (first) {
            if (neg) out += "-";
            first = false;
        } else {
            out += neg ? " - " : " + ";
        }
        std::string vars;
        auto add_var = [&](char v, uint32_t e) {
            if (e == 0) return;
            if (!vars.empty()) vars += "*";
            vars += v;
            if (e > 1) {
                vars += "^";
                vars += std::to_string(e);
            }
        };
        add_var('a', t.ea);
        add_var('b', t.eb);
        add_var('c', t.ec);
        if (vars.empty()) {
            out += mag.get_str();
        } else if (mag == 1) {
            out += vars;
        } else {
            out += mag.get_str() + "*" + vars;
        }
    }
    return out;
}

HomoPoly HomoPoly::parse(const std::string& text) {
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    skip_ws();
    if (i < text.size() && text.compare(i, 1, "0") == 0 && i + 1 == text.size()) return zero();

    std::vector<Term> terms;
    bool neg = false;
    if (i < text.size() && text[i] == '-') {
        neg = true;
        ++i;
    }
    while (i < text.size()) {
        skip_ws();
        mpz_class coef = 1;
        uint32_t ea = 0, eb = 0, ec = 0;
        bool saw_any = false;
        // optional integer
        if (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            coef = mpz_class(text.substr(i, j - i));
            i = j;
            saw_any = true;
            if (i < text.size() && text[i] == '*') ++i;
        }
        // variables
        while (i < text.size() && (text[i] == 'a' || text[i] == 'b' || text[i] == 'c')) {
            char v = text[i++];
            uint32_t e = 1;
            if (i < text.size() && text[i] == '^') {
                ++i;
                std::size_t j = i;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
                if (j == i) throw RingError("malformed exponent in polynomial text");
                e = static_cast<uint32_t>(std::stoul(text.substr(i, j - i)));
                i = j;
            }
            if (v == 'a') ea += e;
            if (v == 'b') eb += e;
            if (v == 'c') ec += e;
            saw_any = true;
            if (i < text.size() && text[i] == '*') ++i;
        }
        if (!saw_any) throw RingError("malformed term in polynomial text");
        if (neg) coef = -coef;
        terms.push_back(Term{ea, eb, ec, std::move(coef)});
        skip_ws();
        if (i >= text.size()) break;
        if (text[i] == '+') {
            neg = false;
            ++i;
        } else if (text[i] == '-') {
            neg = true;
            ++i;
        } else {
            throw RingError("unexpected character in polynomial text");
        }
    }
    return from_terms(std::move(terms));
}

}  // namespace elab
