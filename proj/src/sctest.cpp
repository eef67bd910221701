#include "elab/sctest.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "elab/common.hpp"

namespace elab::sc {

namespace {

mpq_class q_pow_long(const mpq_class& base, long e) {
    if (e == 0) return mpq_class(1);
    mpz_class num = base.get_num(), den = base.get_den();
    if (e < 0) {
        if (num == 0) throw RingError("zero raised to a negative power");
        std::swap(num, den);
        if (den < 0) {
            den = -den;
            num = -num;
        }
    }
    unsigned long ue = static_cast<unsigned long>(e < 0 ? -e : e);
    mpz_class np, dp;
    mpz_pow_ui(np.get_mpz_t(), num.get_mpz_t(), ue);
    mpz_pow_ui(dp.get_mpz_t(), den.get_mpz_t(), ue);
    mpq_class r(np, dp);
    r.canonicalize();
    return r;
}

}  // namespace

void LaurentSeries::normalize() {
    size_t lead = 0;
    while (lead < coef_.size() && coef_[lead] == 0) ++lead;
    if (lead > 0) {
        coef_.erase(coef_.begin(), coef_.begin() + static_cast<long>(lead));
        valuation_ += static_cast<long>(lead);
    }
}

LaurentSeries LaurentSeries::constant(const mpq_class& u, int order) {
    if (u == 0) return zero();
    if (order < 1) throw TruncationError(1, order);
    std::vector<mpq_class> c(static_cast<size_t>(order), mpq_class(0));
    c[0] = u;
    return from_coefficients(0, std::move(c));
}

LaurentSeries LaurentSeries::epsilon(int order) {
    if (order < 1) throw TruncationError(1, order);
    std::vector<mpq_class> c(static_cast<size_t>(order), mpq_class(0));
    c[0] = 1;
    return from_coefficients(1, std::move(c));
}

LaurentSeries LaurentSeries::from_coefficients(long valuation, std::vector<mpq_class> coef) {
    LaurentSeries s;
    s.exact_zero_ = false;
    s.valuation_ = valuation;
    s.coef_ = std::move(coef);
    long w = s.valuation_ + static_cast<long>(s.coef_.size());
    s.normalize();
    if (s.coef_.empty()) s.valuation_ = w;
    return s;
}

long LaurentSeries::valuation() const {
    if (exact_zero_) throw RingError("the zero series has no valuation");
    if (coef_.empty()) throw TruncationError(1, 0);
    return valuation_;
}

long LaurentSeries::window_end() const {
    if (exact_zero_) throw RingError("the zero series has no window");
    return valuation_ + static_cast<long>(coef_.size());
}

mpq_class LaurentSeries::coefficient(long e) const {
    if (exact_zero_) return mpq_class(0);
    if (e < valuation_) return mpq_class(0);
    if (e >= window_end()) {
        throw TruncationError(static_cast<int>(e - valuation_ + 1), static_cast<int>(coef_.size()));
    }
    return coef_[static_cast<size_t>(e - valuation_)];
}

mpq_class LaurentSeries::eval(const mpq_class& eps0) const {
    if (exact_zero_) return mpq_class(0);
    mpq_class acc(0);
    for (size_t i = 0; i < coef_.size(); ++i) {
        if (coef_[i] == 0) continue;
        acc += coef_[i] * q_pow_long(eps0, valuation_ + static_cast<long>(i));
    }
    return acc;
}

std::string LaurentSeries::to_string() const {
    if (exact_zero_) return "0";
    if (coef_.empty()) return "O(eps^" + std::to_string(valuation_) + ")";
    std::ostringstream out;
    bool first = true;
    for (size_t i = 0; i < coef_.size(); ++i) {
        if (coef_[i] == 0) continue;
        long e = valuation_ + static_cast<long>(i);
        mpq_class c = coef_[i];
        if (first) {
            if (c < 0) {
                out << "-";
                c = -c;
            }
            first = false;
        } else {
            out << (c < 0 ? " - " : " + ");
            if (c < 0) c = -c;
        }
        bool unit = (c == 1) && e != 0;
        if (!unit) out << c.get_str();
        if (e != 0) {
            if (!unit) out << "*";
            out << "eps";
            if (e != 1) out << "^" << e;
        }
    }
    out << " + O(eps^" << window_end() << ")";
    return out.str();
}

LaurentSeries neg(const LaurentSeries& x) {
    LaurentSeries out = x;
    for (auto& c : out.coef_) c = -c;
    return out;
}

LaurentSeries add(const LaurentSeries& x, const LaurentSeries& y) {
    if (x.is_exact_zero()) return y;
    if (y.is_exact_zero()) return x;
    long v = std::min(x.valuation_, y.valuation_);
    long wx = x.valuation_ + static_cast<long>(x.coef_.size());
    long wy = y.valuation_ + static_cast<long>(y.coef_.size());
    long w = std::min(wx, wy);
    LaurentSeries out;
    out.exact_zero_ = false;
    if (w <= v) {
        out.valuation_ = w;
        return out;
    }
    out.valuation_ = v;
    out.coef_.assign(static_cast<size_t>(w - v), mpq_class(0));
    for (size_t i = 0; i < x.coef_.size(); ++i) {
        long e = x.valuation_ + static_cast<long>(i);
        if (e < w) out.coef_[static_cast<size_t>(e - v)] += x.coef_[i];
    }
    for (size_t i = 0; i < y.coef_.size(); ++i) {
        long e = y.valuation_ + static_cast<long>(i);
        if (e < w) out.coef_[static_cast<size_t>(e - v)] += y.coef_[i];
    }
    out.normalize();
    if (out.coef_.empty()) out.valuation_ = w;
    return out;
}

LaurentSeries sub(const LaurentSeries& x, const LaurentSeries& y) { return add(x, neg(y)); }

LaurentSeries mul(const LaurentSeries& x, const LaurentSeries& y) {
    if (x.is_exact_zero() || y.is_exact_zero()) return LaurentSeries::zero();
    if (x.window_empty() || y.window_empty()) throw TruncationError(1, 0);
    long v = x.valuation_ + y.valuation_;
    long wx = x.valuation_ + static_cast<long>(x.coef_.size());
    long wy = y.valuation_ + static_cast<long>(y.coef_.size());
    long w = std::min(wx + y.valuation_, wy + x.valuation_);
    LaurentSeries out;
    out.exact_zero_ = false;
    out.valuation_ = v;
    out.coef_.assign(static_cast<size_t>(w - v), mpq_class(0));
    for (size_t i = 0; i < x.coef_.size(); ++i) {
        if (x.coef_[i] == 0) continue;
        for (size_t j = 0; j < y.coef_.size(); ++j) {
            if (i + j >= out.coef_.size()) break;
            if (y.coef_[j] == 0) continue;
            out.coef_[i + j] += x.coef_[i] * y.coef_[j];
        }
    }
    out.normalize();
    if (out.coef_.empty()) out.valuation_ = w;
    return out;
}

LaurentSeries inv(const LaurentSeries& x) {
    if (x.is_exact_zero()) throw RingError("inverse of the zero series");
    if (x.window_empty()) throw TruncationError(1, 0);
    size_t L = x.coef_.size();
    std::vector<mpq_class> b(L, mpq_class(0));
    const mpq_class& a0 = x.coef_[0];
    b[0] = mpq_class(1) / a0;
    for (size_t n = 1; n < L; ++n) {
        mpq_class s(0);
        for (size_t j = 1; j <= n; ++j) s += x.coef_[j] * b[n - j];
        b[n] = -s / a0;
    }
    return LaurentSeries::from_coefficients(-x.valuation_, std::move(b));
}

LaurentSeries pow(const LaurentSeries& x, long m) {
    if (m < 0) return pow(inv(x), -m);
    if (m == 0) return LaurentSeries::constant(1, std::max(x.order(), 1));
    LaurentSeries base = x;
    LaurentSeries acc;
    bool have = false;
    unsigned long e = static_cast<unsigned long>(m);
    while (e > 0) {
        if (e & 1) {
            acc = have ? mul(acc, base) : base;
            have = true;
        }
        e >>= 1;
        if (e > 0) base = mul(base, base);
    }
    return acc;
}

LaurentSeries series_arith(const LaurentSeries& x, const LaurentSeries& y, SeriesOp op, long m) {
    switch (op) {
        case SeriesOp::add: return add(x, y);
        case SeriesOp::mul: return mul(x, y);
        case SeriesOp::inv: return inv(x);
        case SeriesOp::pow: return pow(x, m);
    }
    throw RingError("unknown series operation");
}

std::string verdict_name(SCVerdict v) {
    switch (v) {
        case SCVerdict::confined: return "confined";
        case SCVerdict::non_confined: return "non_confined";
        case SCVerdict::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

SCReport sc_run(int k, const mpq_class& u, int order, int horizon) {
    if (k < 1) throw RingError("map exponent k must be at least 1");
    if (u == 0) throw RingError("seed u must be a nonzero rational");
    if (order < 2) throw RingError("series order must be at least 2");
    if (horizon < 1) throw RingError("horizon must be at least 1");

    SCReport rep;
    rep.k = k;
    rep.u = u;
    rep.horizon = horizon;
    rep.order_requested = order;

    for (int attempt = 0; attempt <= 4; ++attempt) {
        int order_try = order << attempt;
        rep.order_used = order_try;
        rep.widenings = attempt;
        rep.valuations.clear();
        rep.verdict = SCVerdict::indeterminate;
        rep.step = -1;
        rep.limit = 0;

        LaurentSeries xp = LaurentSeries::constant(u, order_try);
        LaurentSeries xc = LaurentSeries::epsilon(order_try);
        rep.valuations.push_back(xc.valuation());
        bool entered = false;
        bool widened = false;
        for (int step = 1; step <= horizon; ++step) {
            LaurentSeries xn;
            try {
                xn = add(add(neg(xp), xc), pow(xc, -static_cast<long>(k)));
            } catch (const TruncationError&) {
                rep.step = step;
                widened = true;
                break;
            }
            if (xn.window_empty()) {
                rep.step = step;
                widened = true;
                break;
            }
            long val = xn.valuation();
            rep.valuations.push_back(val);
            if (val < 0) entered = true;
            if (entered && val == 0) {
                rep.verdict = SCVerdict::confined;
                rep.step = step;
                rep.limit = xn.coefficient(0);
                return rep;
            }
            xp = xc;
            xc = xn;
        }
        if (!widened) {
            rep.verdict = SCVerdict::non_confined;
            rep.step = -1;
            return rep;
        }
    }
    return rep;  // indeterminate after the widening budget
}

SCVerdict classify(int k, const std::vector<mpq_class>& seeds, int order, int horizon) {
    if (seeds.size() < 2) throw RingError("classification needs at least two seeds");
    for (size_t i = 0; i < seeds.size(); ++i) {
        for (size_t j = i + 1; j < seeds.size(); ++j) {
            if (seeds[i] == seeds[j]) throw RingError("classification seeds must be distinct");
        }
    }
    std::vector<SCReport> reps;
    reps.reserve(seeds.size());
    for (const auto& u : seeds) reps.push_back(sc_run(k, u, order, horizon));

    bool all_confined = true, all_failed = true;
    for (const auto& r : reps) {
        all_confined = all_confined && r.verdict == SCVerdict::confined;
        all_failed = all_failed && r.verdict == SCVerdict::non_confined;
    }
    if (all_confined) {
        // same step everywhere, and distinct seeds recover distinct limits
        for (const auto& r : reps) {
            if (r.step != reps[0].step) return SCVerdict::indeterminate;
        }
        for (size_t i = 0; i < reps.size(); ++i) {
            for (size_t j = i + 1; j < reps.size(); ++j) {
                if (reps[i].limit == reps[j].limit) return SCVerdict::indeterminate;
            }
        }
        return SCVerdict::confined;
    }
    if (all_failed) return SCVerdict::non_confined;
    return SCVerdict::indeterminate;
}

std::string sc_report_to_json(const SCReport& rep) {
    nlohmann::json j;
    j["k"] = rep.k;
    j["u"] = rep.u.get_str();
    j["valuations"] = rep.valuations;
    j["verdict"] = verdict_name(rep.verdict);
    if (rep.verdict == SCVerdict::confined) {
        j["step"] = rep.step;
        j["limit"] = rep.limit.get_str();
    }
    j["horizon"] = rep.horizon;
    j["order"] = rep.order_requested;
    j["order_used"] = rep.order_used;
    j["widenings"] = rep.widenings;
    return j.dump();
}

}  // namespace elab::sc
