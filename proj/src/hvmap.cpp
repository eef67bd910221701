#include "elab/hvmap.hpp"

#include <algorithm>
#include <cassert>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>

#include <json.hpp>

#include "elab/common.hpp"

namespace elab::hv {

namespace {

// k = 1 shares the even-k degree and factor structure
bool even_family(int k) { return k % 2 == 0 || k == 1; }

HomoPoly first_iterate(int k) {
    // p_1 = a^{k+1} + c^{k+1} - a^k b
    unsigned ku = static_cast<unsigned>(k);
    return HomoPoly::from_terms({
        Term{ku + 1, 0, 0, 1},
        Term{ku, 1, 0, -1},
        Term{0, 0, ku + 1, 1},
    });
}

HomoPoly second_iterate(int k, MulKernel kernel) {
    // p_2 = (c^{k+1} - a^k b) p_1^k + c^{k+1} a^{k(k+1)}
    unsigned ku = static_cast<unsigned>(k);
    HomoPoly p1 = first_iterate(k);
    HomoPoly lead = HomoPoly::from_terms({Term{0, 0, ku + 1, 1}, Term{ku, 1, 0, -1}});
    HomoPoly tail = HomoPoly::monomial(1, ku * (ku + 1), 0, ku + 1);
    return HomoPoly::mul(lead, HomoPoly::pow(p1, ku, kernel), kernel) + tail;
}

mpq_class q_pow(const mpq_class& base, const mpz_class& e) {
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
    mpz_class ae = abs(e);
    if (!ae.fits_ulong_p()) throw RingError("exponent too large for exact evaluation");
    unsigned long ue = ae.get_ui();
    mpz_class np, dp;
    mpz_pow_ui(np.get_mpz_t(), num.get_mpz_t(), ue);
    mpz_pow_ui(dp.get_mpz_t(), den.get_mpz_t(), ue);
    mpq_class r(np, dp);
    r.canonicalize();
    return r;
}

unsigned to_exp(const mpz_class& v, const char* what) {
    if (v < 0 || !v.fits_ulong_p()) throw RingError(std::string(what) + " does not fit an exponent");
    return static_cast<unsigned>(v.get_ui());
}

std::mutex g_memo_mutex;
// p_n per (k, n)
std::map<std::pair<int, int>, std::shared_ptr<const HomoPoly>> g_pn_memo;
// running product (p_0 ... p_m)^{k(k+1)} per (k, m)
std::map<std::pair<int, int>, std::shared_ptr<const HomoPoly>> g_rprod_memo;

std::shared_ptr<const HomoPoly> memo_find(std::map<std::pair<int, int>, std::shared_ptr<const HomoPoly>>& m,
                                          int k, int n) {
    std::lock_guard<std::mutex> lock(g_memo_mutex);
    auto it = m.find({k, n});
    return it == m.end() ? nullptr : it->second;
}

std::shared_ptr<const HomoPoly> memo_put(std::map<std::pair<int, int>, std::shared_ptr<const HomoPoly>>& m,
                                         int k, int n, HomoPoly value) {
    auto sp = std::make_shared<const HomoPoly>(std::move(value));
    std::lock_guard<std::mutex> lock(g_memo_mutex);
    // insert-if-absent: a concurrent caller may have won the race
    auto [it, fresh] = m.emplace(std::make_pair(k, n), sp);
    (void)fresh;
    return it->second;
}

std::shared_ptr<const HomoPoly> running_product(int k, int m, MulKernel kernel);

std::shared_ptr<const HomoPoly> pn_impl(int k, int n, MulKernel kernel) {
    if (auto hit = memo_find(g_pn_memo, k, n)) return hit;
    unsigned ku = static_cast<unsigned>(k);
    HomoPoly value;
    if (n == 0) {
        value = HomoPoly::var_a();
    } else if (n == 1) {
        value = first_iterate(k);
    } else {
        // p_n = p_{n-1}^k (p_{n-1} - p_{n-2}^{k+1}) + c^{k+1} (p_{n-2} ... p_0)^{k(k+1)}
        auto prev = pn_impl(k, n - 1, kernel);
        auto prev2 = pn_impl(k, n - 2, kernel);
        auto rp = running_product(k, n - 2, kernel);
        HomoPoly head = HomoPoly::mul(HomoPoly::pow(*prev, ku, kernel),
                                      *prev - HomoPoly::pow(*prev2, ku + 1, kernel), kernel);
        value = head + HomoPoly::mul(HomoPoly::monomial(1, 0, 0, ku + 1), *rp, kernel);
    }
    return memo_put(g_pn_memo, k, n, std::move(value));
}

std::shared_ptr<const HomoPoly> running_product(int k, int m, MulKernel kernel) {
    if (auto hit = memo_find(g_rprod_memo, k, m)) return hit;
    unsigned ku = static_cast<unsigned>(k);
    HomoPoly value;
    if (m == 0) {
        value = HomoPoly::monomial(1, ku * (ku + 1), 0, 0);
    } else {
        auto prev = running_product(k, m - 1, kernel);
        auto pm = pn_impl(k, m, kernel);
        value = HomoPoly::mul(*prev, HomoPoly::pow(*pm, ku * (ku + 1), kernel), kernel);
    }
    return memo_put(g_rprod_memo, k, m, std::move(value));
}

// ceiling for the exact chain work a single desk machine can absorb
constexpr int kChainDegreeCap = 3400;

void check_chain_ceiling(int k, int target, const mpz_class& expected_degree) {
    bool ok;
    if (even_family(k) && k != 1) {
        ok = k <= 4 && target <= 6;
    } else {
        ok = k <= 5 && target <= 5;
    }
    if (ok && expected_degree > kChainDegreeCap) ok = false;
    if (!ok) {
        throw RingError("chain entry " + std::to_string(target) + " at k = " + std::to_string(k) +
                        " is past the exact-computation ceiling; use mod-p shadows instead");
    }
}

}  // namespace

ProjectiveState ProjectiveState::initial() {
    ProjectiveState s;
    s.n = 0;
    s.p = HomoPoly::var_a();
    s.q = HomoPoly::var_b();
    s.r = HomoPoly::var_c();
    return s;
}

ProjectiveState step_projective(const ProjectiveState& s, int k, MulKernel kernel) {
    if (k < 1) throw RingError("map exponent k must be at least 1");
    unsigned ku = static_cast<unsigned>(k);
    HomoPoly pk = HomoPoly::pow(s.p, ku, kernel);
    HomoPoly pk1 = HomoPoly::mul(pk, s.p, kernel);
    ProjectiveState out;
    out.n = s.n + 1;
    out.p = pk1 - HomoPoly::mul(s.q, pk, kernel) + HomoPoly::pow(s.r, ku + 1, kernel);
    out.q = pk1;
    out.r = HomoPoly::mul(s.r, pk, kernel);
    return out;
}

HomoPoly iterate_pn(int k, int n, MulKernel kernel) {
    if (k < 1) throw RingError("map exponent k must be at least 1");
    if (n < 0) throw RingError("iterate index must be nonnegative");
    // degree (k+1)^n; refuse sizes past the desk ceiling
    double deg = std::pow(static_cast<double>(k + 1), static_cast<double>(n));
    if (deg > 3200.0) {
        throw RingError("iterate " + std::to_string(n) + " at k = " + std::to_string(k) +
                        " is past the exact-computation ceiling; use mod-p shadows instead");
    }
    return *pn_impl(k, n, kernel);
}

void clear_pn_cache() {
    std::lock_guard<std::mutex> lock(g_memo_mutex);
    g_pn_memo.clear();
    g_rprod_memo.clear();
}

FactorChain::FactorChain(int k, ChainSeeds seeds) : k_(k), seeds_(seeds), n_max_(0) {
    if (k < 1) throw RingError("map exponent k must be at least 1");
    entries_.resize(5);
    entries_[0] = std::make_shared<const HomoPoly>(seeds == ChainSeeds::with_b ? HomoPoly::var_b()
                                                                               : HomoPoly::constant(1));
    for (int i = 1; i <= 3; ++i) entries_[i] = std::make_shared<const HomoPoly>(HomoPoly::constant(1));
    entries_[4] = std::make_shared<const HomoPoly>(HomoPoly::var_a());
    beta_ = seq::beta_seq(k, 0).values;
    alpha_ = seq::alpha_seq(k, 0).values;
}

const HomoPoly& FactorChain::at(int i) const {
    if (i < -4 || i > n_max_) throw std::out_of_range("chain entry index out of range");
    return *entries_[static_cast<size_t>(i + 4)];
}

int FactorChain::degree_at(int i) const { return at(i).degree(); }

bool t_substitution_affordable(int k, int n) {
    switch (k) {
        case 1: return n <= 8;
        case 2: return n <= 6;
        case 3: return n <= 5;
        case 4: return n <= 4;
        default: return n <= 3;
    }
}

int recurrence_start(int k, ChainSeeds seeds) {
    if (even_family(k)) return seeds == ChainSeeds::with_b ? 1 : 2;
    return 3;
}

namespace {

HomoPoly chain_tsub(const FactorChain& chain, int target, MulKernel kernel) {
    int k = chain.k();
    unsigned ku = static_cast<unsigned>(k);
    const std::vector<mpz_class> alpha = seq::alpha_seq(k, target).values;
    HomoPoly img = HomoPoly::substitute(chain.at(target - 1), first_iterate(k),
                                        HomoPoly::monomial(1, ku + 1, 0, 0),
                                        HomoPoly::monomial(1, ku, 0, 1), kernel);
    unsigned an = to_exp(alpha[static_cast<size_t>(target)], "alpha value");
    if (static_cast<unsigned>(img.ord_a()) < an) {
        throw IdentityViolation(k, target, "t-substitution",
                                "substituted entry lacks the scheduled a-power at index " +
                                    std::to_string(target));
    }
    return img.shift_down_a(an);
}

// product of entries at j, j-3, j-6, ... down to the lowest nonnegative index
HomoPoly downward_product(const FactorChain& chain, int j, MulKernel kernel) {
    HomoPoly acc = HomoPoly::constant(1);
    for (int i = j; i >= 0; i -= 3) acc = HomoPoly::mul(acc, chain.at(i), kernel);
    return acc;
}

HomoPoly chain_recurrence(const FactorChain& chain, int target, MulKernel kernel) {
    int k = chain.k();
    unsigned ku = static_cast<unsigned>(k);
    int n = target - 1;
    HomoPoly ck1 = HomoPoly::monomial(1, 0, 0, ku + 1);
    if (even_family(k)) {
        HomoPoly head = HomoPoly::mul(HomoPoly::pow(chain.at(n - 3), ku + 1, kernel),
                                      HomoPoly::pow(chain.at(n), ku + 1, kernel), kernel);
        HomoPoly mid = HomoPoly::mul(chain.at(n - 4),
                                     HomoPoly::mul(HomoPoly::pow(chain.at(n - 1), ku + 1, kernel),
                                                   HomoPoly::pow(chain.at(n), ku, kernel), kernel),
                                     kernel);
        HomoPoly tail = HomoPoly::mul(
            ck1,
            HomoPoly::pow(HomoPoly::mul(chain.at(n - 2), chain.at(n - 1), kernel), ku * (ku + 1), kernel),
            kernel);
        HomoPoly num = head - mid + tail;
        HomoPoly den = HomoPoly::mul(HomoPoly::pow(chain.at(n - 3), ku, kernel),
                                     HomoPoly::pow(chain.at(n - 2), ku + 1, kernel), kernel);
        try {
            return HomoPoly::divide_exact(num, den, kernel);
        } catch (const NotDivisible&) {
            throw IdentityViolation(k, target, "recurrence",
                                    "entry numerator is not divisible by the scheduled denominator at index " +
                                        std::to_string(target));
        }
    }
    // odd k >= 3: subtraction-free in the chain entries, no division
    HomoPoly r1 = downward_product(chain, n - 1, kernel);
    HomoPoly r2 = downward_product(chain, n - 2, kernel);
    HomoPoly r3 = downward_product(chain, n - 3, kernel);
    unsigned ksq1 = ku * ku - 1;
    unsigned kk1 = ku * (ku + 1);
    HomoPoly piece1 = -HomoPoly::pow(HomoPoly::mul(chain.at(n), chain.at(n - 1), kernel), ku, kernel);
    HomoPoly piece2 = HomoPoly::mul(
        ck1,
        HomoPoly::mul(HomoPoly::pow(chain.at(n), ku, kernel),
                      HomoPoly::mul(HomoPoly::pow(r2, ksq1, kernel), HomoPoly::pow(r3, kk1, kernel), kernel),
                      kernel),
        kernel);
    HomoPoly piece3 = HomoPoly::mul(
        ck1, HomoPoly::mul(HomoPoly::pow(r1, kk1, kernel), HomoPoly::pow(r2, ksq1, kernel), kernel), kernel);
    return piece1 + piece2 + piece3;
}

}  // namespace

FactorChain extend_chain(const FactorChain& chain, ChainMode mode, MulKernel kernel) {
    int k = chain.k_;
    int target = chain.n_max_ + 1;
    seq::DegreePair degs = seq::degree_seqs(k, target);
    const mpz_class& expected_deg = degs.st.values[static_cast<size_t>(target)];
    check_chain_ceiling(k, target, expected_deg);

    std::vector<std::pair<std::string, HomoPoly>> candidates;
    if (target == 1) {
        candidates.emplace_back("closed", first_iterate(k));
    } else if (target == 2) {
        candidates.emplace_back("closed", second_iterate(k, kernel));
    }
    int rec_from = recurrence_start(k, chain.seeds_);
    bool want_rec = (mode != ChainMode::t_substitution) && target >= rec_from;
    bool want_tsub = (mode != ChainMode::recurrence) && t_substitution_affordable(k, target);
    if (mode == ChainMode::t_substitution && !want_tsub) {
        throw RingError("t-substitution at chain index " + std::to_string(target) + " for k = " +
                        std::to_string(k) + " is past its affordability window");
    }
    if (want_rec) candidates.emplace_back("recurrence", chain_recurrence(chain, target, kernel));
    if (want_tsub) candidates.emplace_back("t-substitution", chain_tsub(chain, target, kernel));
    if (candidates.empty()) {
        throw RingError("no computation mode applies at chain index " + std::to_string(target));
    }

    for (const auto& [label, value] : candidates) {
        if (mpz_class(value.degree()) != expected_deg) {
            throw IdentityViolation(k, target, label,
                                    "entry degree " + std::to_string(value.degree()) +
                                        " differs from the scheduled degree " + expected_deg.get_str());
        }
    }
    for (size_t i = 1; i < candidates.size(); ++i) {
        if (!(candidates[0].second == candidates[i].second)) {
            throw IdentityViolation(k, target, candidates[0].first + "+" + candidates[i].first,
                                    "computation modes disagree at chain index " + std::to_string(target));
        }
    }

    FactorChain out = chain;
    out.n_max_ = target;
    out.entries_.push_back(std::make_shared<const HomoPoly>(std::move(candidates[0].second)));
    out.beta_ = seq::beta_seq(k, target).values;
    out.alpha_ = seq::alpha_seq(k, target).values;
    return out;
}

FactorChain extend_chain_to(FactorChain chain, int n, ChainMode mode, MulKernel kernel) {
    while (chain.n_max() < n) chain = extend_chain(chain, mode, kernel);
    return chain;
}

IdentityReport product_identity_check(const FactorChain& chain, int n, MulKernel kernel) {
    if (n < 0 || n > chain.n_max()) throw std::out_of_range("chain is shorter than the requested index");
    int k = chain.k();
    IdentityReport rep;
    rep.k = k;
    rep.n = n;
    const std::vector<mpz_class> beta = seq::beta_seq(k, n).values;
    rep.exponents.reserve(static_cast<size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) rep.exponents.push_back(beta[static_cast<size_t>(n - j)]);

    HomoPoly lhs = iterate_pn(k, n, kernel);
    HomoPoly rhs = HomoPoly::monomial(1, to_exp(beta[static_cast<size_t>(n)], "beta value"), 0, 0);
    for (int j = 1; j <= n; ++j) {
        unsigned e = to_exp(beta[static_cast<size_t>(n - j)], "beta value");
        if (e == 0) continue;
        rhs = HomoPoly::mul(rhs, HomoPoly::pow(chain.at(j), e, kernel), kernel);
    }
    rep.lhs_degree = lhs.degree();
    rep.rhs_degree = rhs.degree();
    rep.pass = (lhs == rhs);
    return rep;
}

int ReducedFraction::degree_numerator() const {
    int d = 0;
    for (const auto& [f, e] : numerator) d += f.degree() * static_cast<int>(e);
    return d;
}

int ReducedFraction::degree_denominator() const {
    int d = c_power;
    for (const auto& [f, e] : denominator) d += f.degree() * static_cast<int>(e);
    return d;
}

mpq_class ReducedFraction::eval(const mpq_class& a, const mpq_class& b, const mpq_class& c) const {
    mpq_class num(1), den(q_pow(c, c_power));
    for (const auto& [f, e] : numerator) num *= q_pow(f.eval_q(a, b, c), e);
    for (const auto& [f, e] : denominator) den *= q_pow(f.eval_q(a, b, c), e);
    if (den == 0) throw RingError("reduced form denominator vanishes at this point");
    return num / den;
}

int exp_pattern(int k, int j) {
    if (j < 0) throw RingError("pattern index must be nonnegative");
    return j % 3 == 0 ? 1 : -k;
}

ReducedFraction x_reduced(const FactorChain& chain, int n) {
    if (n < 0 || n > chain.n_max()) throw std::out_of_range("chain is shorter than the requested index");
    int k = chain.k();
    unsigned ku = static_cast<unsigned>(k);
    ReducedFraction out;
    out.c_power = 1;
    auto push = [](std::vector<std::pair<HomoPoly, unsigned>>& side, const HomoPoly& f, unsigned e) {
        if (f == HomoPoly::constant(1)) return;  // formal unit entries drop out
        side.emplace_back(f, e);
    };
    if (even_family(k)) {
        push(out.numerator, chain.at(n), 1);
        if (n - 3 >= -3) push(out.numerator, chain.at(n - 3), 1);
        if (n - 1 >= -3) push(out.denominator, chain.at(n - 1), ku);
        if (n - 2 >= -3) push(out.denominator, chain.at(n - 2), ku);
        return out;
    }
    for (int j = 0; j <= n; ++j) {
        int e = exp_pattern(k, j);
        if (e > 0) {
            push(out.numerator, chain.at(n - j), 1);
        } else {
            push(out.denominator, chain.at(n - j), ku);
        }
    }
    return out;
}

const std::array<mpz_class, 3>& GaugeSeq::exp_at(int i) const {
    if (i < -4 || static_cast<size_t>(i + 4) >= exps.size()) {
        throw std::out_of_range("gauge index out of range");
    }
    return exps[static_cast<size_t>(i + 4)];
}

bool GaugeSeq::has_value(int i) const {
    return i >= -4 && static_cast<size_t>(i + 4) < values.size();
}

const mpq_class& GaugeSeq::value_at(int i) const {
    if (!has_value(i)) throw std::out_of_range("gauge value not materialized at this index");
    return values[static_cast<size_t>(i + 4)];
}

GaugeSeq gauge_sequence(int k, const mpq_class& mu1, const mpq_class& mu2, const mpq_class& mu3, int n_max) {
    if (k < 1) throw RingError("map exponent k must be at least 1");
    if (n_max < 0) throw RingError("gauge horizon must be nonnegative");
    if (mu1 == 0 || mu2 == 0 || mu3 == 0) {
        throw DegenerateGauge("gauge values mu1, mu2, mu3 must all be nonzero");
    }
    GaugeSeq out;
    out.k = k;
    // seeds: u_{-4} = (mu2 mu3)^k / mu1, u_{-3} = mu3, u_{-2} = mu2; the
    // recurrence e_i = k(e_{i-1} + e_{i-2}) - e_{i-3} regenerates
    // u_{-1} = mu1 and u_0 = (mu1 mu2)^k / mu3 from these
    out.exps.push_back({mpz_class(-1), mpz_class(k), mpz_class(k)});
    out.exps.push_back({mpz_class(0), mpz_class(0), mpz_class(1)});
    out.exps.push_back({mpz_class(0), mpz_class(1), mpz_class(0)});
    for (int i = -1; i <= n_max; ++i) {
        const auto& e1 = out.exps[out.exps.size() - 1];
        const auto& e2 = out.exps[out.exps.size() - 2];
        const auto& e3 = out.exps[out.exps.size() - 3];
        std::array<mpz_class, 3> e;
        for (int c = 0; c < 3; ++c) e[static_cast<size_t>(c)] = k * (e1[static_cast<size_t>(c)] + e2[static_cast<size_t>(c)]) - e3[static_cast<size_t>(c)];
        out.exps.push_back(std::move(e));
    }
    assert(out.exps[3] == (std::array<mpz_class, 3>{mpz_class(1), mpz_class(0), mpz_class(0)}));
    assert(out.exps[4] == (std::array<mpz_class, 3>{mpz_class(k), mpz_class(k), mpz_class(-1)}));

    const mpq_class mus[3] = {mu1, mu2, mu3};
    const mpz_class value_cap = 5000;
    for (const auto& e : out.exps) {
        if (abs(e[0]) > value_cap || abs(e[1]) > value_cap || abs(e[2]) > value_cap) break;
        mpq_class v = q_pow(mus[0], e[0]) * q_pow(mus[1], e[1]) * q_pow(mus[2], e[2]);
        out.values.push_back(std::move(v));
    }
    return out;
}

std::vector<mpq_class> rational_orbit(int k, const mpq_class& x_prev, const mpq_class& x0, int n_steps) {
    if (k < 1) throw RingError("map exponent k must be at least 1");
    if (n_steps < 0) throw RingError("step count must be nonnegative");
    std::vector<mpq_class> out;
    out.reserve(static_cast<size_t>(n_steps));
    mpq_class prev = x_prev, cur = x0;
    for (int step = 1; step <= n_steps; ++step) {
        if (cur == 0) throw SingularOrbit(step);
        mpq_class next = -prev + cur + q_pow(cur, mpz_class(-k));
        out.push_back(next);
        prev = cur;
        cur = next;
    }
    return out;
}

void dump_chain(const FactorChain& chain, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto entry_name = [](int i) {
        return i < 0 ? "p_prime_m" + std::to_string(-i) + ".txt" : "p_prime_" + std::to_string(i) + ".txt";
    };
    nlohmann::json manifest;
    manifest["schema"] = "entropy-lab/1";
    manifest["k"] = chain.k();
    manifest["seeds"] = chain.seeds() == ChainSeeds::with_b ? "with_b" : "unit";
    manifest["n"] = chain.n_max();
    manifest["index_min"] = -4;
    nlohmann::json degrees = nlohmann::json::array();
    nlohmann::json files = nlohmann::json::array();
    for (int i = -4; i <= chain.n_max(); ++i) {
        degrees.push_back(chain.degree_at(i));
        files.push_back(entry_name(i));
        std::ofstream f(fs::path(out_dir) / entry_name(i));
        f << chain.at(i).to_string() << "\n";
    }
    manifest["degrees"] = degrees;
    manifest["entries"] = files;
    nlohmann::json beta = nlohmann::json::array(), alpha = nlohmann::json::array();
    for (const auto& v : chain.beta()) beta.push_back(v.get_str());
    for (const auto& v : chain.alpha()) alpha.push_back(v.get_str());
    manifest["beta"] = beta;
    manifest["alpha"] = alpha;
    std::ofstream mf(fs::path(out_dir) / "manifest.json");
    mf << manifest.dump(2) << "\n";
}

}  // namespace elab::hv
