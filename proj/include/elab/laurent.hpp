#pragma once

#include <string>
#include <vector>

#include <gmpxx.h>

namespace elab::sc {

// Truncated Laurent series in an infinitesimal eps with exact rational
// coefficients.  A series knows the window [valuation, window_end) on which
// its coefficients are guaranteed; arithmetic propagates the surviving
// window and refuses to answer outside it.  When every stored coefficient
// of a result cancels, the value is "zero through the window end, unknown
// beyond": the window is empty and asking for its valuation throws.
class LaurentSeries {
public:
    LaurentSeries() : exact_zero_(true), valuation_(0) {}

    static LaurentSeries zero() { return LaurentSeries(); }
    // u as a series known on [0, order)
    static LaurentSeries constant(const mpq_class& u, int order);
    // eps itself, known on [1, 1 + order)
    static LaurentSeries epsilon(int order);
    // coefficients for eps^valuation ... eps^{valuation + size - 1}
    static LaurentSeries from_coefficients(long valuation, std::vector<mpq_class> coef);

    bool is_exact_zero() const { return exact_zero_; }
    bool window_empty() const { return !exact_zero_ && coef_.empty(); }

    long valuation() const;    // leading exponent; throws when unknowable
    long window_end() const;   // first exponent past the guarantee
    int order() const { return static_cast<int>(coef_.size()); }
    const std::vector<mpq_class>& coefficients() const { return coef_; }

    // coefficient of eps^e; exact 0 below the valuation, TruncationError at
    // or past the window end
    mpq_class coefficient(long e) const;

    // exact value at a concrete rational eps0 (the window tail is dropped)
    mpq_class eval(const mpq_class& eps0) const;

    std::string to_string() const;

    friend LaurentSeries neg(const LaurentSeries& x);
    friend LaurentSeries add(const LaurentSeries& x, const LaurentSeries& y);
    friend LaurentSeries mul(const LaurentSeries& x, const LaurentSeries& y);
    friend LaurentSeries inv(const LaurentSeries& x);

private:
    bool exact_zero_;
    long valuation_;  // for an empty window this marks the window end
    std::vector<mpq_class> coef_;  // nonempty implies coef_[0] != 0

    void normalize();
};

LaurentSeries neg(const LaurentSeries& x);
LaurentSeries add(const LaurentSeries& x, const LaurentSeries& y);
LaurentSeries sub(const LaurentSeries& x, const LaurentSeries& y);
LaurentSeries mul(const LaurentSeries& x, const LaurentSeries& y);
LaurentSeries inv(const LaurentSeries& x);
LaurentSeries pow(const LaurentSeries& x, long m);

enum class SeriesOp { add, mul, inv, pow };

// single-dispatch convenience wrapper; y is ignored for inv and pow, m is
// read only for pow
LaurentSeries series_arith(const LaurentSeries& x, const LaurentSeries& y, SeriesOp op, long m = 0);

}  // namespace elab::sc
