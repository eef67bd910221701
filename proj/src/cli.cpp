// entropy-lab: command-line surface over the exact iteration, degree
// profiling, entropy fitting, singularity-confinement, and verification
// modules.  The CLI only assembles output; all parallelism lives in the
// library.  Identical invocations (same flags, same seed) produce
// byte-identical output; timing fields are opt-in for that reason.

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "elab/common.hpp"
#include "elab/hvmap.hpp"
#include "elab/mapdsl.hpp"
#include "elab/modp.hpp"
#include "elab/poly.hpp"
#include "elab/sctest.hpp"
#include "elab/sequences.hpp"
#include "elab/verify.hpp"

namespace {

using nlohmann::json;

constexpr const char* kSchema = "entropy-lab/1";

bool parse_rational(const std::string& text, mpq_class& out) {
    if (text.empty()) return false;
    if (mpq_set_str(out.get_mpq_t(), text.c_str(), 10) != 0) return false;
    if (out.get_den() == 0) return false;
    out.canonicalize();
    return true;
}

// flag > ENTROPY_LAB_THREADS > library default
void apply_threads(int flag_value) {
    int t = flag_value;
    if (t <= 0) {
        if (const char* env = std::getenv("ENTROPY_LAB_THREADS")) {
            int v = std::atoi(env);
            if (v > 0) t = v;
        }
    }
    if (t > 0) {
        omp_set_num_threads(t);
        elab::set_poly_threads(t);
    }
}

int emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot open " << out_path << " for writing\n";
        return 1;
    }
    f << text;
    return f.good() ? 0 : 1;
}

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size() && i < width.size(); ++i)
            width[i] = std::max(width[i], row[i].size());
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << "  ";
            out << cells[i];
            if (i + 1 < cells.size()) out << std::string(width[i] - cells[i].size(), ' ');
        }
        out << "\n";
    };
    line(header);
    std::vector<std::string> rule(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) rule[i] = std::string(width[i], '-');
    line(rule);
    for (const auto& row : rows) line(row);
    return out.str();
}

std::string fmt_double(double v, const char* spec = "%.12g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

double ln_mpz(const mpz_class& v) {
    long e2 = 0;
    double mant = mpz_get_d_2exp(&e2, v.get_mpz_t());
    return std::log(std::fabs(mant)) + static_cast<double>(e2) * std::log(2.0);
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> build_pairs(
    const std::vector<std::uint64_t>& primes, int pairs, std::uint64_t seed) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    if (!primes.empty()) {
        for (std::size_t i = 0; i < primes.size(); ++i)
            out.emplace_back(primes[i], seed + static_cast<std::uint64_t>(i));
    } else {
        for (int i = 0; i < pairs; ++i)
            out.emplace_back(elab::nth_prime(static_cast<std::size_t>(i)),
                             seed + static_cast<std::uint64_t>(i));
    }
    return out;
}

// ---------------------------------------------------------------------------
// iterate

struct IterateOpts {
    int k = 2;
    int n = 8;
    std::string x_prev = "2";
    std::string x0 = "3";
    std::string format = "table";
    std::string out;
};

int run_iterate(const IterateOpts& o) {
    mpq_class xp, x0;
    if (!parse_rational(o.x_prev, xp) || !parse_rational(o.x0, x0)) {
        std::cerr << "error: seeds must be rationals like 3 or -5/7\n";
        return 2;
    }
    std::vector<mpq_class> orbit;
    int singular_at = -1;
    try {
        orbit = elab::hv::rational_orbit(o.k, xp, x0, o.n);
    } catch (const elab::SingularOrbit& e) {
        singular_at = e.step;
        if (e.step > 1) orbit = elab::hv::rational_orbit(o.k, xp, x0, e.step - 1);
    }
    if (o.format == "json") {
        json j;
        j["schema"] = kSchema;
        j["command"] = "iterate";
        j["k"] = o.k;
        j["n"] = o.n;
        j["x_prev"] = xp.get_str();
        j["x0"] = x0.get_str();
        j["orbit"] = json::array();
        for (std::size_t i = 0; i < orbit.size(); ++i)
            j["orbit"].push_back({{"n", i + 1}, {"x", orbit[i].get_str()}});
        if (singular_at >= 0) j["singular_at"] = singular_at;
        return emit(j.dump(2) + "\n", o.out);
    }
    if (o.format == "csv") {
        std::ostringstream s;
        s << "n,x\n";
        for (std::size_t i = 0; i < orbit.size(); ++i) s << (i + 1) << "," << orbit[i].get_str() << "\n";
        if (singular_at >= 0) std::cerr << "orbit singular at step " << singular_at << "\n";
        return emit(s.str(), o.out);
    }
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"-1", xp.get_str()});
    rows.push_back({"0", x0.get_str()});
    for (std::size_t i = 0; i < orbit.size(); ++i)
        rows.push_back({std::to_string(i + 1), orbit[i].get_str()});
    std::ostringstream s;
    s << "x[n+1] = -x[n-1] + x[n] + 1/x[n]^" << o.k << "\n"
      << render_table({"n", "x_n"}, rows);
    if (singular_at >= 0) s << "orbit singular at step " << singular_at << "\n";
    return emit(s.str(), o.out);
}

// ---------------------------------------------------------------------------
// chain

struct ChainOpts {
    int k = 2;
    int n = 4;
    std::string seeds = "unit";
    std::string dump_dir;
    std::string format = "table";
    std::string out;
    int threads = 0;
};

int run_chain(const ChainOpts& o) {
    apply_threads(o.threads);
    auto seeds = o.seeds == "with-b" ? elab::hv::ChainSeeds::with_b : elab::hv::ChainSeeds::unit;
    elab::hv::FactorChain chain(o.k, seeds);
    chain = elab::hv::extend_chain_to(std::move(chain), o.n);
    if (!o.dump_dir.empty()) {
        elab::hv::dump_chain(chain, o.dump_dir);
        std::cerr << "wrote chain entries and manifest under " << o.dump_dir << "\n";
    }
    const auto& beta = chain.beta();
    const auto& alpha = chain.alpha();
    if (o.format == "json") {
        json j;
        j["schema"] = kSchema;
        j["command"] = "chain";
        j["k"] = o.k;
        j["seeds"] = o.seeds;
        j["n"] = chain.n_max();
        j["entries"] = json::array();
        for (int i = -4; i <= chain.n_max(); ++i)
            j["entries"].push_back({{"index", i},
                                    {"degree", chain.degree_at(i)},
                                    {"terms", chain.at(i).term_count()}});
        j["beta"] = json::array();
        j["alpha"] = json::array();
        for (const auto& b : beta) j["beta"].push_back(b.get_str());
        for (const auto& a : alpha) j["alpha"].push_back(a.get_str());
        return emit(j.dump(2) + "\n", o.out);
    }
    if (o.format == "csv") {
        std::ostringstream s;
        s << "index,degree,terms,beta,alpha\n";
        for (int i = -4; i <= chain.n_max(); ++i) {
            s << i << "," << chain.degree_at(i) << "," << chain.at(i).term_count() << ",";
            if (i >= 0 && i < static_cast<int>(beta.size())) s << beta[i].get_str();
            s << ",";
            if (i >= 0 && i < static_cast<int>(alpha.size())) s << alpha[i].get_str();
            s << "\n";
        }
        return emit(s.str(), o.out);
    }
    std::vector<std::vector<std::string>> rows;
    for (int i = -4; i <= chain.n_max(); ++i) {
        std::string b = i >= 0 && i < static_cast<int>(beta.size()) ? beta[i].get_str() : "";
        std::string a = i >= 0 && i < static_cast<int>(alpha.size()) ? alpha[i].get_str() : "";
        rows.push_back({std::to_string(i), std::to_string(chain.degree_at(i)),
                        std::to_string(chain.at(i).term_count()), b, a});
    }
    std::ostringstream s;
    s << "factor chain, k=" << o.k << ", seeds=" << o.seeds << "\n"
      << render_table({"index", "degree", "terms", "beta", "alpha"}, rows);
    return emit(s.str(), o.out);
}

// ---------------------------------------------------------------------------
// degrees

struct DegreesOpts {
    int k = 2;
    int n = 10;
    std::string method = "closed";
    bool plot_data = false;
    std::vector<std::uint64_t> primes;
    int pairs = 2;
    std::uint64_t seed = 42;
    std::string format = "csv";
    std::string out;
    int threads = 0;
};

int run_degrees(const DegreesOpts& o) {
    apply_threads(o.threads);
    std::vector<mpz_class> degrees;
    bool agreed = true;
    std::string disagreement;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> prs;
    if (o.method == "closed") {
        auto dp = elab::seq::degree_seqs(o.k, o.n);
        degrees = dp.d.values;
    } else {
        prs = build_pairs(o.primes, o.pairs, o.seed);
        auto map = elab::dsl::family_map(o.k);
        auto pc = elab::dsl::profile_consensus(map, o.n, prs);
        for (long d : pc.degrees) degrees.emplace_back(d);
        agreed = pc.agreed;
        disagreement = pc.disagreement;
    }
    if (!agreed) std::cerr << "warning: profile runs disagree: " << disagreement << "\n";
    if (o.format == "json") {
        json j;
        j["schema"] = kSchema;
        j["command"] = "degrees";
        j["k"] = o.k;
        j["n"] = o.n;
        j["method"] = o.method;
        j["degrees"] = json::array();
        for (const auto& d : degrees) j["degrees"].push_back(d.get_str());
        if (o.plot_data) {
            j["log_degrees"] = json::array();
            for (const auto& d : degrees) j["log_degrees"].push_back(ln_mpz(d));
        }
        if (o.method == "modp") {
            j["agreed"] = agreed;
            if (!agreed) j["disagreement"] = disagreement;
            j["runs"] = json::array();
            for (auto [p, s] : prs) j["runs"].push_back({{"prime", p}, {"seed", s}});
        }
        return emit(j.dump(2) + "\n", o.out);
    }
    if (o.format == "table") {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < degrees.size(); ++i) {
            std::vector<std::string> row{std::to_string(i), degrees[i].get_str()};
            if (o.plot_data) row.push_back(fmt_double(ln_mpz(degrees[i])));
            rows.push_back(std::move(row));
        }
        std::vector<std::string> header{"n", "degree"};
        if (o.plot_data) header.push_back("log_degree");
        return emit(render_table(header, rows), o.out);
    }
    std::ostringstream s;
    if (o.plot_data) {
        s << "n,log_degree\n";
        for (std::size_t i = 0; i < degrees.size(); ++i)
            s << i << "," << fmt_double(ln_mpz(degrees[i])) << "\n";
    } else {
        s << "n,degree\n";
        for (std::size_t i = 0; i < degrees.size(); ++i) s << i << "," << degrees[i].get_str() << "\n";
    }
    return emit(s.str(), o.out);
}

// ---------------------------------------------------------------------------
// entropy

struct EntropyOpts {
    std::vector<int> ks{2};
    std::string format = "table";
    std::string out;
};

int run_entropy(const EntropyOpts& o) {
    struct Row {
        int k;
        std::string closed, fitted;
        double delta;
    };
    std::vector<Row> results;
    for (int k : o.ks) {
        auto closed = elab::seq::entropy_closed(k);
        auto dp = elab::seq::degree_seqs(k, 12);
        auto fitted = elab::seq::entropy_fitted(dp.d);
        auto diff = closed.entropy - fitted.entropy;
        results.push_back({k, closed.entropy.decimal(10), fitted.entropy.decimal(10),
                           std::fabs(diff.midpoint_double())});
    }
    if (o.format == "json") {
        json j;
        j["schema"] = kSchema;
        j["command"] = "entropy";
        j["results"] = json::array();
        for (const auto& r : results)
            j["results"].push_back(
                {{"k", r.k}, {"closed", r.closed}, {"fitted", r.fitted}, {"delta", r.delta}});
        return emit(j.dump(2) + "\n", o.out);
    }
    if (o.format == "csv") {
        std::ostringstream s;
        s << "k,closed,fitted,delta\n";
        for (const auto& r : results)
            s << r.k << "," << r.closed << "," << r.fitted << "," << fmt_double(r.delta, "%.3e") << "\n";
        return emit(s.str(), o.out);
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : results)
        rows.push_back({std::to_string(r.k), r.closed, r.fitted, fmt_double(r.delta, "%.3e")});
    return emit(render_table({"k", "closed", "fitted", "delta"}, rows), o.out);
}

// ---------------------------------------------------------------------------
// sc-test

struct ScOpts {
    std::vector<int> ks{2};
    int order = 48;
    int horizon = 12;
    std::vector<std::string> us{"2/3", "5/7"};
    std::string format = "table";
    std::string out;
};

int run_sc(const ScOpts& o) {
    std::vector<mpq_class> seeds;
    for (const auto& text : o.us) {
        mpq_class u;
        if (!parse_rational(text, u)) {
            std::cerr << "error: --u takes rationals like 2/3\n";
            return 2;
        }
        seeds.push_back(u);
    }
    std::set<std::string> distinct;
    for (const auto& u : seeds) distinct.insert(u.get_str());
    if (distinct.size() < 2) {
        std::cerr << "error: the confinement verdict needs at least two distinct --u seeds\n";
        return 2;
    }
    struct KResult {
        int k;
        elab::sc::SCVerdict verdict;
        std::vector<elab::sc::SCReport> runs;
    };
    std::vector<KResult> results;
    for (int k : o.ks) {
        KResult r;
        r.k = k;
        for (const auto& u : seeds) r.runs.push_back(elab::sc::sc_run(k, u, o.order, o.horizon));
        r.verdict = elab::sc::classify(k, seeds, o.order, o.horizon);
        results.push_back(std::move(r));
    }
    if (o.format == "json") {
        json j;
        j["schema"] = kSchema;
        j["command"] = "sc-test";
        j["order"] = o.order;
        j["horizon"] = o.horizon;
        j["results"] = json::array();
        for (const auto& r : results) {
            json e;
            e["k"] = r.k;
            e["verdict"] = elab::sc::verdict_name(r.verdict);
            e["runs"] = json::array();
            for (const auto& rep : r.runs) e["runs"].push_back(json::parse(elab::sc::sc_report_to_json(rep)));
            j["results"].push_back(std::move(e));
        }
        return emit(j.dump(2) + "\n", o.out);
    }
    if (o.format == "csv") {
        std::ostringstream s;
        s << "k,u,run_verdict,step,order_used,widenings,classify\n";
        for (const auto& r : results)
            for (const auto& rep : r.runs)
                s << r.k << "," << rep.u.get_str() << "," << elab::sc::verdict_name(rep.verdict) << ","
                  << rep.step << "," << rep.order_used << "," << rep.widenings << ","
                  << elab::sc::verdict_name(r.verdict) << "\n";
        return emit(s.str(), o.out);
    }
    std::ostringstream s;
    for (const auto& r : results) {
        s << "k=" << r.k << ": " << elab::sc::verdict_name(r.verdict) << "\n";
        std::vector<std::string> header{"step"};
        for (const auto& rep : r.runs) header.push_back("v(u=" + rep.u.get_str() + ")");
        std::size_t depth = 0;
        for (const auto& rep : r.runs) depth = std::max(depth, rep.valuations.size());
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < depth; ++i) {
            std::vector<std::string> row{std::to_string(i)};
            for (const auto& rep : r.runs)
                row.push_back(i < rep.valuations.size() ? std::to_string(rep.valuations[i]) : "");
            rows.push_back(std::move(row));
        }
        s << render_table(header, rows);
        for (const auto& rep : r.runs) {
            s << "u=" << rep.u.get_str() << ": " << elab::sc::verdict_name(rep.verdict);
            if (rep.verdict == elab::sc::SCVerdict::confined)
                s << " at step " << rep.step << ", limit " << rep.limit.get_str();
            if (rep.widenings > 0) s << " (order widened to " << rep.order_used << ")";
            s << "\n";
        }
        s << "\n";
    }
    return emit(s.str(), o.out);
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOpts {
    std::vector<int> ks{2, 3};
    std::string suite = "all";
    std::uint64_t seed = 42;
    bool timings = false;
    std::string format = "table";
    std::string out;
    int threads = 0;
};

int run_verify(const VerifyOpts& o) {
    apply_threads(o.threads);
    elab::verify::SuiteOptions opts;
    opts.ks = o.ks;
    opts.seed = o.seed;
    if (o.suite != "all") {
        std::stringstream ss(o.suite);
        std::string item;
        const auto& known = elab::verify::suite_check_ids();
        while (std::getline(ss, item, ',')) {
            if (std::find(known.begin(), known.end(), item) == known.end()) {
                std::cerr << "error: unknown check '" << item << "'; valid checks:";
                for (const auto& id : known) std::cerr << " " << id;
                std::cerr << " (or 'all')\n";
                return 2;
            }
            opts.checks.push_back(item);
        }
    }
    auto res = elab::verify::run_suite(opts);
    int exit_code = res.any_violated ? 1 : 0;
    if (o.format == "json") {
        json j;
        j["schema"] = kSchema;
        j["command"] = "verify";
        j["ks"] = o.ks;
        j["suite"] = o.suite;
        j["seed"] = o.seed;
        j["any_violated"] = res.any_violated;
        j["any_unknown"] = res.any_unknown;
        j["instances"] = json::array();
        for (const auto& rep : res.reports)
            for (const auto& inst : rep.instances) {
                json e;
                e["check"] = inst.check_id;
                e["k"] = inst.k;
                e["n"] = inst.n;
                e["outcome"] = elab::verify::outcome_name(inst.outcome);
                e["evidence"] = inst.evidence;
                if (o.timings) e["millis"] = inst.millis;
                j["instances"].push_back(std::move(e));
            }
        int rc = emit(j.dump(2) + "\n", o.out);
        return rc != 0 ? rc : exit_code;
    }
    if (o.format == "csv") {
        int rc = emit(elab::verify::reports_csv(res.reports, o.timings), o.out);
        return rc != 0 ? rc : exit_code;
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& rep : res.reports) {
        int ver = 0, unk = 0, vio = 0;
        for (const auto& inst : rep.instances) {
            switch (inst.outcome) {
                case elab::verify::Outcome::verified: ++ver; break;
                case elab::verify::Outcome::certificate_unknown: ++unk; break;
                case elab::verify::Outcome::violated: ++vio; break;
            }
        }
        std::vector<std::string> row{rep.check_id,
                                     std::to_string(rep.k),
                                     std::to_string(rep.n_lo) + ".." + std::to_string(rep.n_hi),
                                     std::to_string(ver),
                                     std::to_string(unk),
                                     std::to_string(vio)};
        if (o.timings) row.push_back(fmt_double(rep.millis, "%.1f"));
        rows.push_back(std::move(row));
    }
    std::vector<std::string> header{"check", "k", "window", "verified", "unknown", "violated"};
    if (o.timings) header.push_back("millis");
    std::ostringstream s;
    s << render_table(header, rows);
    for (const auto& rep : res.reports)
        for (const auto& inst : rep.instances) {
            if (inst.outcome == elab::verify::Outcome::verified) continue;
            std::string ev = inst.evidence;
            if (ev.size() > 140) ev = ev.substr(0, 137) + "...";
            s << elab::verify::outcome_name(inst.outcome) << ": " << inst.check_id << " k=" << inst.k
              << " n=" << inst.n << " :: " << ev << "\n";
        }
    s << (res.any_violated ? "suite: VIOLATED\n"
                           : (res.any_unknown ? "suite: pass (some certificates unknown)\n"
                                              : "suite: pass\n"));
    int rc = emit(s.str(), o.out);
    return rc != 0 ? rc : exit_code;
}

// ---------------------------------------------------------------------------
// profile

struct ProfileOpts {
    std::string map_arg;
    int n = 10;
    std::vector<std::uint64_t> primes;
    int pairs = 2;
    std::uint64_t seed = 42;
    std::string format = "table";
    std::string out;
    int threads = 0;
};

int run_profile(const ProfileOpts& o) {
    apply_threads(o.threads);
    std::string text = o.map_arg;
    {
        std::ifstream f(o.map_arg);
        if (f) {
            std::ostringstream buf;
            buf << f.rdbuf();
            text = buf.str();
        }
    }
    elab::dsl::MapDef map;
    try {
        map = elab::dsl::parse_map(text);
    } catch (const std::runtime_error& e) {
        std::cerr << "error: cannot parse map: " << e.what() << "\n"
                  << "the accepted grammar is documented in the README (entropy-lab profile)\n";
        return 2;
    }
    for (const auto& w : map.warnings) std::cerr << "warning: " << w << "\n";
    auto prs = build_pairs(o.primes, o.pairs, o.seed);
    auto pc = elab::dsl::profile_consensus(map, o.n, prs);
    if (!pc.agreed) std::cerr << "warning: profile runs disagree: " << pc.disagreement << "\n";

    elab::seq::DegreeSeq ds;
    ds.label = "custom";
    for (long d : pc.degrees) ds.values.emplace_back(d);
    bool have_fit = false;
    std::string fit_note;
    elab::seq::LinearRecurrence rec;
    elab::seq::EntropyResult ent;
    try {
        rec = elab::seq::fit_recurrence(ds);
        ent = elab::seq::entropy_fitted(ds);
        have_fit = true;
    } catch (const elab::FitUnstable& e) {
        fit_note = e.what();
    } catch (const elab::RootNotFound& e) {
        fit_note = e.what();
    }

    if (o.format == "json") {
        json j = json::parse(elab::dsl::profile_json(pc, elab::dsl::pretty_print(map)));
        j["command"] = "profile";
        if (have_fit) {
            json fit;
            fit["order"] = rec.order;
            fit["coefficients"] = json::array();
            for (const auto& c : rec.coefficients) fit["coefficients"].push_back(c.get_str());
            fit["constant"] = rec.constant.get_str();
            fit["char_poly"] = json::array();
            for (const auto& c : ent.char_poly) fit["char_poly"].push_back(c.get_str());
            fit["dominant_root"] = ent.root.decimal(10);
            fit["entropy"] = ent.entropy.decimal(10);
            j["fit"] = std::move(fit);
        } else {
            j["fit"] = nullptr;
            j["fit_note"] = fit_note;
        }
        return emit(j.dump(2) + "\n", o.out);
    }
    if (o.format == "csv") {
        return emit(elab::dsl::profile_csv(pc), o.out);
    }
    std::ostringstream s;
    s << "map: " << elab::dsl::pretty_print(map) << "\n";
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < pc.degrees.size(); ++i)
        rows.push_back({std::to_string(i), std::to_string(pc.degrees[i])});
    s << render_table({"n", "degree"}, rows);
    for (const auto& run : pc.runs)
        s << "run prime=" << run.prime << " seed=" << run.seed << " retries=" << run.retries << "\n";
    if (have_fit) {
        s << "minimal recurrence (order " << rec.order << "): d[n] =";
        bool first = true;
        for (std::size_t i = 0; i < rec.coefficients.size(); ++i) {
            const auto& c = rec.coefficients[i];
            if (c == 0) continue;
            if (first) {
                s << " " << c.get_str();
                first = false;
            } else {
                mpq_class mag = abs(c);
                s << (c > 0 ? " + " : " - ") << mag.get_str();
            }
            s << "*d[n-" << (i + 1) << "]";
        }
        if (rec.constant != 0 || first)
            s << (first ? " " : " + ") << rec.constant.get_str();
        s << "\n";
        s << "dominant root: " << ent.root.decimal(10) << "\n";
        s << "entropy estimate: " << ent.entropy.decimal(10) << "\n";
    } else {
        s << "no stable recurrence fit: " << fit_note << "\n";
    }
    return emit(s.str(), o.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact-arithmetic laboratory for the map x[n+1] = -x[n-1] + x[n] + 1/x[n]^k"};
    app.require_subcommand(1);
    const auto formats = CLI::IsMember({"json", "csv", "table"});

    IterateOpts it;
    auto* sub_it = app.add_subcommand("iterate", "exact rational orbit from two seeds");
    sub_it->add_option("--k", it.k, "family exponent")->check(CLI::PositiveNumber);
    sub_it->add_option("--n", it.n, "number of steps")->check(CLI::PositiveNumber);
    sub_it->add_option("--x-prev", it.x_prev, "seed x[-1], a rational");
    sub_it->add_option("--x0", it.x0, "seed x[0], a rational");
    sub_it->add_option("--format", it.format, "output format")->check(formats);
    sub_it->add_option("--out", it.out, "write output to this file");

    ChainOpts ch;
    auto* sub_ch = app.add_subcommand("chain", "factor chain entries, degrees, and unit exponents");
    sub_ch->add_option("--k", ch.k, "family exponent")->check(CLI::PositiveNumber);
    sub_ch->add_option("--n", ch.n, "extend the chain to this index")->check(CLI::NonNegativeNumber);
    sub_ch->add_option("--seeds", ch.seeds, "seed convention")->check(CLI::IsMember({"unit", "with-b"}));
    sub_ch->add_option("--dump-dir", ch.dump_dir, "write manifest and one polynomial file per entry");
    sub_ch->add_option("--format", ch.format, "output format")->check(formats);
    sub_ch->add_option("--out", ch.out, "write output to this file");
    sub_ch->add_option("--threads", ch.threads, "worker threads (env ENTROPY_LAB_THREADS otherwise)");

    DegreesOpts dg;
    auto* sub_dg = app.add_subcommand("degrees", "degree sequence of the reduced iterates");
    sub_dg->add_option("--k", dg.k, "family exponent")->check(CLI::PositiveNumber);
    sub_dg->add_option("--n", dg.n, "last index")->check(CLI::PositiveNumber);
    sub_dg->add_option("--method", dg.method, "closed recurrence or mod-p profiling")
        ->check(CLI::IsMember({"closed", "modp"}));
    sub_dg->add_flag("--plot-data", dg.plot_data, "emit n vs log degree");
    sub_dg->add_option("--prime", dg.primes, "profiling primes (repeatable; modp only)");
    sub_dg->add_option("--pairs", dg.pairs, "number of independent (prime, seed) runs")
        ->check(CLI::Range(1, 8));
    sub_dg->add_option("--seed", dg.seed, "base seed for the profiling lines");
    sub_dg->add_option("--format", dg.format, "output format")->check(formats);
    sub_dg->add_option("--out", dg.out, "write output to this file");
    sub_dg->add_option("--threads", dg.threads, "worker threads (env ENTROPY_LAB_THREADS otherwise)");

    EntropyOpts en;
    auto* sub_en = app.add_subcommand("entropy", "closed-form vs fitted algebraic entropy");
    sub_en->add_option("--k", en.ks, "family exponent (repeatable)")->check(CLI::PositiveNumber);
    sub_en->add_option("--format", en.format, "output format")->check(formats);
    sub_en->add_option("--out", en.out, "write output to this file");

    ScOpts sc;
    auto* sub_sc = app.add_subcommand("sc-test", "singularity confinement over truncated series");
    sub_sc->add_option("--k", sc.ks, "family exponent (repeatable)")->check(CLI::PositiveNumber);
    sub_sc->add_option("--order", sc.order, "series truncation order")->check(CLI::PositiveNumber);
    sub_sc->add_option("--horizon", sc.horizon, "steps to follow the perturbed orbit")
        ->check(CLI::PositiveNumber);
    sub_sc->add_option("--u", sc.us, "base point x[-1] = u (repeatable rational; need two distinct)");
    sub_sc->add_option("--format", sc.format, "output format")->check(formats);
    sub_sc->add_option("--out", sc.out, "write output to this file");

    VerifyOpts vf;
    auto* sub_vf = app.add_subcommand("verify", "run the verification suite");
    sub_vf->add_option("--k", vf.ks, "family exponent (repeatable)")->check(CLI::PositiveNumber);
    sub_vf->add_option("--suite", vf.suite, "'all' or a comma-separated list of check ids");
    sub_vf->add_option("--seed", vf.seed, "seed for the randomized certificates");
    sub_vf->add_flag("--timings", vf.timings, "include wall-clock timings (output varies run to run)");
    sub_vf->add_option("--format", vf.format, "output format")->check(formats);
    sub_vf->add_option("--out", vf.out, "write output to this file");
    sub_vf->add_option("--threads", vf.threads, "worker threads (env ENTROPY_LAB_THREADS otherwise)");

    ProfileOpts pf;
    auto* sub_pf = app.add_subcommand("profile", "mod-p degree profile and recurrence fit of a map");
    sub_pf->add_option("map", pf.map_arg, "map file or inline expression like x[n+1] = ...")
        ->required();
    sub_pf->add_option("--n", pf.n, "steps to profile")->check(CLI::PositiveNumber);
    sub_pf->add_option("--prime", pf.primes, "profiling primes (repeatable)");
    sub_pf->add_option("--pairs", pf.pairs, "number of independent (prime, seed) runs")
        ->check(CLI::Range(1, 8));
    sub_pf->add_option("--seed", pf.seed, "base seed for the profiling lines");
    sub_pf->add_option("--format", pf.format, "output format")->check(formats);
    sub_pf->add_option("--out", pf.out, "write output to this file");
    sub_pf->add_option("--threads", pf.threads, "worker threads (env ENTROPY_LAB_THREADS otherwise)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (app.got_subcommand(sub_it)) return run_iterate(it);
        if (app.got_subcommand(sub_ch)) return run_chain(ch);
        if (app.got_subcommand(sub_dg)) return run_degrees(dg);
        if (app.got_subcommand(sub_en)) return run_entropy(en);
        if (app.got_subcommand(sub_sc)) return run_sc(sc);
        if (app.got_subcommand(sub_vf)) return run_verify(vf);
        if (app.got_subcommand(sub_pf)) return run_profile(pf);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
