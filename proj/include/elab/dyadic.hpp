#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <string>

#include "elab/common.hpp"

namespace elab {

// Interval arithmetic with dyadic endpoints lo*2^e, hi*2^e.  All rounding is
// outward, so any true value that enters stays enclosed.  Used to evaluate
// sqrt and ln with certified error bounds.

inline mpz_class shift_floor(const mpz_class& m, unsigned long s) {
    mpz_class r;
    mpz_fdiv_q_2exp(r.get_mpz_t(), m.get_mpz_t(), s);
    return r;
}

inline mpz_class shift_ceil(const mpz_class& m, unsigned long s) {
    mpz_class r;
    mpz_cdiv_q_2exp(r.get_mpz_t(), m.get_mpz_t(), s);
    return r;
}

class DyadicInterval {
public:
    // invariant: lo_ <= hi_, value set = [lo_*2^e_, hi_*2^e_]
    DyadicInterval() : lo_(0), hi_(0), e_(0) {}

    DyadicInterval(mpz_class lo, mpz_class hi, long e) : lo_(std::move(lo)), hi_(std::move(hi)), e_(e) {
        if (lo_ > hi_) throw RingError("interval endpoints out of order");
    }

    static DyadicInterval exact_int(long v) { return DyadicInterval(v, v, 0); }
    static DyadicInterval exact_int(const mpz_class& v) { return DyadicInterval(v, v, 0); }

    // exact representation of a dyadic rational m / 2^s
    static DyadicInterval from_dyadic(const mpq_class& q) {
        mpz_class den = q.get_den();
        std::size_t s = mpz_scan1(den.get_mpz_t(), 0);
        if ((den >> s) != 1) throw RingError("denominator is not a power of two");
        return DyadicInterval(q.get_num(), q.get_num(), -static_cast<long>(s));
    }

    // exact halving
    DyadicInterval halved() const { return DyadicInterval(lo_, hi_, e_ - 1); }

    // smallest interval containing both
    DyadicInterval hull(const DyadicInterval& o) const {
        auto [x, y] = aligned(*this, o);
        return DyadicInterval(std::min(x.lo_, y.lo_), std::max(x.hi_, y.hi_), x.e_);
    }

    // tightest prec-bit enclosure of a rational
    static DyadicInterval from_mpq(const mpq_class& q, long prec) {
        // scale so that |num| * 2^(prec) / den has about prec bits
        mpz_class num = q.get_num(), den = q.get_den();
        long e = -(prec + 1);
        mpz_class scaled_num = num << static_cast<unsigned long>(prec + 1);
        mpz_class lo, hi, rem;
        mpz_fdiv_qr(lo.get_mpz_t(), rem.get_mpz_t(), scaled_num.get_mpz_t(), den.get_mpz_t());
        hi = lo;
        if (rem != 0) hi += 1;
        return DyadicInterval(lo, hi, e);
    }

    const mpz_class& lo_mantissa() const { return lo_; }
    const mpz_class& hi_mantissa() const { return hi_; }
    long exponent() const { return e_; }

    bool strictly_positive() const { return lo_ > 0; }
    bool strictly_negative() const { return hi_ < 0; }

    // round outward so mantissas fit in roughly prec bits
    DyadicInterval rounded(long prec) const {
        std::size_t bits = std::max(mpz_sizeinbase(lo_.get_mpz_t(), 2), mpz_sizeinbase(hi_.get_mpz_t(), 2));
        if (static_cast<long>(bits) <= prec) return *this;
        unsigned long drop = static_cast<unsigned long>(bits - prec);
        return DyadicInterval(shift_floor(lo_, drop), shift_ceil(hi_, drop), e_ + static_cast<long>(drop));
    }

    friend DyadicInterval operator+(const DyadicInterval& a, const DyadicInterval& b) {
        auto [x, y] = aligned(a, b);
        return DyadicInterval(x.lo_ + y.lo_, x.hi_ + y.hi_, x.e_);
    }

    friend DyadicInterval operator-(const DyadicInterval& a, const DyadicInterval& b) {
        auto [x, y] = aligned(a, b);
        return DyadicInterval(x.lo_ - y.hi_, x.hi_ - y.lo_, x.e_);
    }

    friend DyadicInterval operator*(const DyadicInterval& a, const DyadicInterval& b) {
        mpz_class p1 = a.lo_ * b.lo_, p2 = a.lo_ * b.hi_, p3 = a.hi_ * b.lo_, p4 = a.hi_ * b.hi_;
        mpz_class lo = std::min(std::min(p1, p2), std::min(p3, p4));
        mpz_class hi = std::max(std::max(p1, p2), std::max(p3, p4));
        return DyadicInterval(lo, hi, a.e_ + b.e_);
    }

    // division, denominator must be strictly positive
    DyadicInterval divided_by(const DyadicInterval& d, long prec) const {
        if (!d.strictly_positive()) throw RingError("interval division by a set containing zero or negatives");
        // [lo/dhi, hi/dlo] with outward rounding at prec extra bits
        unsigned long s = static_cast<unsigned long>(prec + 2);
        mpz_class lo_num = lo_ << s, hi_num = hi_ << s;
        mpz_class lo, hi;
        // lo endpoint: most negative quotient
        if (lo_ >= 0)
            mpz_fdiv_q(lo.get_mpz_t(), lo_num.get_mpz_t(), d.hi_.get_mpz_t());
        else
            mpz_fdiv_q(lo.get_mpz_t(), lo_num.get_mpz_t(), d.lo_.get_mpz_t());
        if (hi_ >= 0)
            mpz_cdiv_q(hi.get_mpz_t(), hi_num.get_mpz_t(), d.lo_.get_mpz_t());
        else
            mpz_cdiv_q(hi.get_mpz_t(), hi_num.get_mpz_t(), d.hi_.get_mpz_t());
        return DyadicInterval(lo, hi, e_ - d.e_ - static_cast<long>(s));
    }

    DyadicInterval sqrt(long prec) const {
        if (lo_ < 0) throw RingError("sqrt of an interval with negative part");
        // align to even exponent with enough fractional bits
        DyadicInterval x = *this;
        long shift_up = 2 * prec + ((x.e_ % 2 == 0) ? 0 : 1);
        if ((x.e_ - shift_up) % 2 != 0) shift_up += 1;
        mpz_class lo_m = x.lo_ << static_cast<unsigned long>(shift_up);
        mpz_class hi_m = x.hi_ << static_cast<unsigned long>(shift_up);
        long e2 = (x.e_ - shift_up) / 2;
        mpz_class rlo, rhi, rem;
        mpz_sqrt(rlo.get_mpz_t(), lo_m.get_mpz_t());
        mpz_sqrtrem(rhi.get_mpz_t(), rem.get_mpz_t(), hi_m.get_mpz_t());
        if (rem != 0) rhi += 1;
        return DyadicInterval(rlo, rhi, e2);
    }

    // natural log of a strictly positive interval
    DyadicInterval ln(long prec) const {
        if (!strictly_positive()) throw RingError("ln of a non-positive interval");
        if (lo_ == hi_ && lo_q() == 1) return DyadicInterval(0, 0, 0);  // ln 1 = 0 exactly
        // x^(1/8), then ln x = 8 * ln(root)
        long wp = prec + 32;
        DyadicInterval r = this->rounded(wp).sqrt(wp).sqrt(wp).sqrt(wp);
        DyadicInterval one = exact_int(1);
        DyadicInterval t = (r - one).divided_by(r + one, wp);
        t = t.rounded(wp);
        // atanh series: sum t^(2j+1)/(2j+1), tail bounded geometrically
        DyadicInterval t2 = (t * t).rounded(wp);
        // |t| upper bound as dyadic
        mpz_class abs_lo = abs(t.lo_), abs_hi = abs(t.hi_);
        mpz_class tmax = std::max(abs_lo, abs_hi);
        // iterate until term magnitude falls below 2^(e-wp-8)
        DyadicInterval sum(0, 0, 0);
        DyadicInterval power = t;
        long j = 0;
        while (true) {
            DyadicInterval term = power.divided_by(exact_int(2 * j + 1), wp).rounded(wp);
            // magnitude estimate of the term's upper bound
            sum = (sum + term).rounded(wp);
            mpz_class mag = std::max(abs(term.lo_), abs(term.hi_));
            std::size_t magbits = mpz_sizeinbase(mag.get_mpz_t(), 2);
            if (mag == 0 || static_cast<long>(magbits) + term.exponent() < -(wp + 8)) break;
            power = (power * t2).rounded(wp);
            ++j;
            if (j > 8L * wp) throw RingError("atanh series failed to converge");
        }
        // tail bound: |t|^(2J+3)/(1-|t|^2) <= 2 * last term magnitude when |t|^2 < 1/2
        DyadicInterval last = power.divided_by(exact_int(2 * j + 1), wp);
        mpz_class tail_m = 2 * std::max(abs(last.lo_), abs(last.hi_)) + 1;
        DyadicInterval tail(-tail_m, tail_m, last.exponent());
        DyadicInterval atanh_t = (sum + tail).rounded(wp);
        DyadicInterval result = atanh_t * exact_int(16);  // 2 * atanh * 8
        return result.rounded(prec);
    }

    // signed comparison with a rational: +1 if entirely above, -1 entirely below, 0 overlapping
    int compare(const mpq_class& q) const {
        mpq_class lo_q = endpoint_q(lo_), hi_q = endpoint_q(hi_);
        if (lo_q > q) return 1;
        if (hi_q < q) return -1;
        return 0;
    }

    mpq_class lo_q() const { return endpoint_q(lo_); }
    mpq_class hi_q() const { return endpoint_q(hi_); }

    mpq_class width() const { return endpoint_q(hi_) - endpoint_q(lo_); }

    double midpoint_double() const {
        mpq_class mid = (endpoint_q(lo_) + endpoint_q(hi_)) / 2;
        return mid.get_d();
    }

    // decimal string of the midpoint, rounded to nearest; valid to `digits`
    // places only if the interval is narrow enough, so converge first
    std::string decimal(int digits) const {
        mpq_class mid = (endpoint_q(lo_) + endpoint_q(hi_)) / 2;
        bool neg = mid < 0;
        if (neg) mid = -mid;
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
        mpz_class num = mid.get_num() * scale * 2 + mid.get_den();
        mpz_class q = num / (mid.get_den() * 2);
        mpz_class whole = q / scale, frac = q % scale;
        std::string fs = frac.get_str();
        fs.insert(fs.begin(), static_cast<std::size_t>(digits) - fs.size(), '0');
        return (neg ? "-" : "") + whole.get_str() + "." + fs;
    }

private:
    mpq_class endpoint_q(const mpz_class& m) const {
        mpq_class v(m);
        if (e_ >= 0) {
            mpz_class f = mpz_class(1) << static_cast<unsigned long>(e_);
            v *= mpq_class(f);
        } else {
            mpz_class f = mpz_class(1) << static_cast<unsigned long>(-e_);
            v /= mpq_class(f);
        }
        return v;
    }

    static std::pair<DyadicInterval, DyadicInterval> aligned(DyadicInterval a, DyadicInterval b) {
        if (a.e_ < b.e_) {
            unsigned long s = static_cast<unsigned long>(b.e_ - a.e_);
            b.lo_ <<= s;
            b.hi_ <<= s;
            b.e_ = a.e_;
        } else if (b.e_ < a.e_) {
            unsigned long s = static_cast<unsigned long>(a.e_ - b.e_);
            a.lo_ <<= s;
            a.hi_ <<= s;
            a.e_ = b.e_;
        }
        return {a, b};
    }

    mpz_class lo_, hi_;
    long e_;
};

}  // namespace elab
