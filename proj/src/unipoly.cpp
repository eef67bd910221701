#include "elab/unipoly.hpp"

#include <gmp.h>
#include <gmpxx.h>

#include <algorithm>
#include <cstring>

namespace elab {
namespace upoly {

void trim(UPoly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

bool is_zero(const UPoly& f) {
    for (uint64_t c : f)
        if (c) return false;
    return true;
}

UPoly add(const UPoly& f, const UPoly& g, uint64_t p) {
    UPoly r(std::max(f.size(), g.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        uint64_t a = i < f.size() ? f[i] : 0;
        uint64_t b = i < g.size() ? g[i] : 0;
        r[i] = addmod(a, b, p);
    }
    trim(r);
    return r;
}

UPoly sub(const UPoly& f, const UPoly& g, uint64_t p) {
    UPoly r(std::max(f.size(), g.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        uint64_t a = i < f.size() ? f[i] : 0;
        uint64_t b = i < g.size() ? g[i] : 0;
        r[i] = submod(a, b, p);
    }
    trim(r);
    return r;
}

UPoly scale(const UPoly& f, uint64_t s, uint64_t p) {
    UPoly r(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) r[i] = mulmod(f[i], s, p);
    trim(r);
    return r;
}

UPoly mul_school(const UPoly& f, const UPoly& g, uint64_t p) {
    if (f.empty() || g.empty()) return {};
    UPoly r(f.size() + g.size() - 1, 0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!f[i]) continue;
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (!g[j]) continue;
            r[i + j] = addmod(r[i + j], mulmod(f[i], g[j], p), p);
        }
    }
    trim(r);
    return r;
}

namespace {

// slots are 3 limbs (192 bits); column sums stay far below 2^191 because
// coefficients are < 2^62 and lengths are < 2^40
constexpr std::size_t kSlotLimbs = 3;

void pack_slots(const UPoly& f, std::vector<mp_limb_t>& buf) {
    buf.assign(f.size() * kSlotLimbs, 0);
    for (std::size_t i = 0; i < f.size(); ++i) buf[i * kSlotLimbs] = f[i];
}

uint64_t fold_slot_mod(const mp_limb_t* w, uint64_t p, uint64_t r64, uint64_t r128) {
    // w[0] + w[1]*2^64 + w[2]*2^128 mod p
    uint64_t acc = w[0] % p;
    acc = addmod(acc, mulmod(w[1] % p, r64, p), p);
    acc = addmod(acc, mulmod(w[2] % p, r128, p), p);
    return acc;
}

}  // namespace

UPoly mul_kronecker(const UPoly& f, const UPoly& g, uint64_t p) {
    if (f.empty() || g.empty()) return {};
    std::vector<mp_limb_t> fb, gb;
    pack_slots(f, fb);
    pack_slots(g, gb);
    mpz_class A, B;
    mpz_import(A.get_mpz_t(), fb.size(), -1, sizeof(mp_limb_t), 0, 0, fb.data());
    mpz_import(B.get_mpz_t(), gb.size(), -1, sizeof(mp_limb_t), 0, 0, gb.data());
    mpz_class C = A * B;

    std::size_t out_slots = f.size() + g.size() - 1;
    std::vector<mp_limb_t> cb(out_slots * kSlotLimbs + kSlotLimbs, 0);
    std::size_t words = 0;
    mpz_export(cb.data(), &words, -1, sizeof(mp_limb_t), 0, 0, C.get_mpz_t());

    uint64_t r64 = (static_cast<unsigned __int128>(1) << 64) % p;
    uint64_t r128 = mulmod(r64, r64, p);
    UPoly r(out_slots, 0);
    for (std::size_t i = 0; i < out_slots; ++i) r[i] = fold_slot_mod(&cb[i * kSlotLimbs], p, r64, r128);
    trim(r);
    return r;
}

UPoly mul(const UPoly& f, const UPoly& g, uint64_t p) {
    if (f.empty() || g.empty()) return {};
    std::size_t work = f.size() * g.size();
    if (work <= (std::size_t(1) << 16)) return mul_school(f, g, p);
    return mul_kronecker(f, g, p);
}

namespace {

UPoly reverse_poly(const UPoly& f, std::size_t n) {
    // coefficients of x^n * f(1/x), padded/truncated to n+1 entries
    UPoly r(n + 1, 0);
    for (std::size_t i = 0; i < f.size() && i <= n; ++i) r[n - i] = f[i];
    trim(r);
    return r;
}

UPoly truncate(UPoly f, std::size_t n) {
    if (f.size() > n) f.resize(n);
    trim(f);
    return f;
}

// inverse of f as a power series mod x^n; f must have a nonzero constant term
UPoly series_inverse(const UPoly& f, std::size_t n, uint64_t p) {
    UPoly inv{invmod(f[0], p)};
    std::size_t k = 1;
    while (k < n) {
        k = std::min(2 * k, n);
        // inv <- inv * (2 - f * inv) mod x^k
        UPoly fi = truncate(mul(truncate(f, k), inv, p), k);
        UPoly two_minus(fi.size() ? fi.size() : 1, 0);
        two_minus.resize(std::max<std::size_t>(1, fi.size()), 0);
        for (std::size_t i = 0; i < two_minus.size(); ++i) two_minus[i] = i < fi.size() ? submod(0, fi[i], p) : 0;
        two_minus[0] = addmod(two_minus[0], 2 % p, p);
        trim(two_minus);
        inv = truncate(mul(inv, two_minus, p), k);
    }
    return inv;
}

}  // namespace

std::pair<UPoly, UPoly> divrem(const UPoly& f, const UPoly& g, uint64_t p) {
    if (is_zero(g)) throw ZeroPolyError("division by the zero polynomial");
    int df = deg(f), dg = deg(g);
    if (df < dg) return {UPoly{}, f};

    std::size_t qs = static_cast<std::size_t>(df - dg + 1);
    // Newton path when the schoolbook cost gets large
    if (qs > 256 && static_cast<std::size_t>(dg) > 16 && qs * static_cast<std::size_t>(dg) > (std::size_t(1) << 20)) {
        UPoly rf = reverse_poly(f, static_cast<std::size_t>(df));
        UPoly rg = reverse_poly(g, static_cast<std::size_t>(dg));
        UPoly inv = series_inverse(rg, qs, p);
        UPoly rq = truncate(mul(rf, inv, p), qs);
        UPoly q = reverse_poly(rq, qs - 1);
        UPoly r = sub(f, mul(q, g, p), p);
        return {q, r};
    }

    UPoly r = f, q(qs, 0);
    uint64_t lg_inv = invmod(g.back(), p);
    for (int i = df; i >= dg; --i) {
        if (static_cast<std::size_t>(i) >= r.size() || r[i] == 0) continue;
        uint64_t coef = mulmod(r[i], lg_inv, p);
        q[i - dg] = coef;
        for (int j = 0; j <= dg; ++j) {
            r[i - dg + j] = submod(r[i - dg + j], mulmod(coef, g[j], p), p);
        }
    }
    trim(q);
    trim(r);
    return {q, r};
}

UPoly rem(const UPoly& f, const UPoly& g, uint64_t p) { return divrem(f, g, p).second; }

UPoly make_monic(const UPoly& f, uint64_t p) {
    if (is_zero(f)) return {};
    return scale(f, invmod(f.back(), p), p);
}

UPoly gcd(UPoly f, UPoly g, uint64_t p) {
    trim(f);
    trim(g);
    while (!is_zero(g)) {
        UPoly r = rem(f, g, p);
        f = std::move(g);
        g = std::move(r);
    }
    return make_monic(f, p);
}

uint64_t eval(const UPoly& f, uint64_t x, uint64_t p) {
    uint64_t acc = 0;
    for (std::size_t i = f.size(); i-- > 0;) acc = addmod(mulmod(acc, x, p), f[i] % p, p);
    return acc;
}

UPoly x_powmod(uint64_t e, const UPoly& f, uint64_t p) {
    UPoly base{0, 1};  // x
    base = rem(base, f, p);
    UPoly acc{1};
    while (e) {
        if (e & 1) acc = rem(mul(acc, base, p), f, p);
        base = rem(mul(base, base, p), f, p);
        e >>= 1;
    }
    return acc;
}

UPoly compose_mod(const UPoly& g, const UPoly& h, const UPoly& f, uint64_t p) {
    UPoly acc{};
    for (std::size_t i = g.size(); i-- > 0;) {
        acc = rem(mul(acc, h, p), f, p);
        if (g[i]) {
            if (acc.empty()) acc.push_back(g[i]);
            else acc[0] = addmod(acc[0], g[i], p);
        }
        trim(acc);
    }
    return acc;
}

namespace {

// x^(p^m) mod f via composition chains: frob(1) = x^p, frob(a+b) = frob(a) o frob(b)
UPoly frobenius_power(uint64_t m, const UPoly& frob1, const UPoly& f, uint64_t p) {
    // binary powering in the composition monoid
    UPoly acc{0, 1};  // identity map: x
    acc = rem(acc, f, p);
    UPoly base = frob1;
    while (m) {
        if (m & 1) acc = compose_mod(acc, base, f, p);
        base = compose_mod(base, base, f, p);
        m >>= 1;
    }
    return acc;
}

std::vector<uint64_t> prime_factors(uint64_t n) {
    std::vector<uint64_t> out;
    for (uint64_t q = 2; q * q <= n; ++q) {
        if (n % q == 0) {
            out.push_back(q);
            while (n % q == 0) n /= q;
        }
    }
    if (n > 1) out.push_back(n);
    return out;
}

}  // namespace

bool irreducible(const UPoly& f_in, uint64_t p) {
    UPoly f = make_monic(f_in, p);
    int n = deg(f);
    if (n <= 0) return false;
    if (n == 1) return true;

    UPoly frob1 = x_powmod(p, f, p);

    // x^(p^n) must equal x mod f
    UPoly xn = frobenius_power(static_cast<uint64_t>(n), frob1, f, p);
    UPoly x_id = rem(UPoly{0, 1}, f, p);
    if (xn != x_id) return false;

    // gcd(x^(p^(n/r)) - x, f) must be 1 for every prime r | n
    for (uint64_t r : prime_factors(static_cast<uint64_t>(n))) {
        UPoly xm = frobenius_power(static_cast<uint64_t>(n) / r, frob1, f, p);
        UPoly diff = sub(xm, x_id, p);
        UPoly g = gcd(diff, f, p);
        if (deg(g) != 0) return false;
    }
    return true;
}

}  // namespace upoly
}  // namespace elab
