#pragma once

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "elab/hvmap.hpp"

namespace elab::verify {

// Mechanical verification of the identity layer: a-orders, absent unit
// factors, the product identity, coprimality and irreducibility
// certificates, z_n signs, the factor-chain congruences, and gauge
// covariance.  Every check is deterministic given (k, range, seed).

enum class Outcome { verified, certificate_unknown, violated };
std::string outcome_name(Outcome o);

struct CheckInstance {
    std::string check_id;
    int k = 0;
    int n = 0;  // instance index within the check's range
    Outcome outcome = Outcome::verified;
    std::string evidence;  // witness values; enough to replay the instance
    double millis = 0.0;
};

struct CheckReport {
    std::string check_id;
    int k = 0;
    int n_lo = 0, n_hi = 0;
    std::vector<CheckInstance> instances;
    double millis = 0.0;

    bool any_violated() const;
    bool any_unknown() const;
};

// z_n and its three auxiliaries: exact integers on the small-n window, a
// (sign, log-magnitude) shadow everywhere.  The shadow's sign logic mirrors
// the recursion; a sum of opposite signs demands a log-magnitude domination
// margin of 10 and falls back to the exact value when the margin fails.
struct ZState {
    int k = 0;
    int exact_max = 0;                              // exact window: n <= exact_max
    std::vector<mpz_class> exact;                   // z_0 .. z_exact_max
    std::vector<int> sign;                          // sign of z_n, all n
    std::vector<long double> log_mag;               // ln|z_n|, all n (0 for z_n = +-1)
    std::vector<std::array<int, 3>> aux_sign;       // signs of z^(1),z^(2),z^(3), from n = 3
    std::vector<std::array<long double, 3>> aux_log;
    std::vector<int> escalated;                     // n where the shadow needed the exact value
};
ZState z_state(int k, int n_max, int exact_max = 10);

// One-sided certificates, exposed for negative controls: `verified` proves
// the property; `certificate_unknown` proves nothing.
Outcome coprime_certificate(const HomoPoly& f, const HomoPoly& g, std::uint64_t seed,
                            std::string* evidence = nullptr);
Outcome irreducible_certificate(const HomoPoly& f, std::uint64_t seed,
                                std::string* evidence = nullptr);

CheckReport check_ord_a(int k, int n_lo, int n_hi);
CheckReport check_unit_factors(int k, int n_lo, int n_hi);
CheckReport check_product_identity(int k, int n_lo, int n_hi);
CheckReport check_coprime(int k, int n_lo, int n_hi, std::uint64_t seed = 42);
CheckReport check_irreducible(int k, int n_lo, int n_hi, std::uint64_t seed = 42);  // k even
CheckReport z_signs(int k, int n_max);                                              // k odd
CheckReport check_congruences(int k, int n_lo, int n_hi);                           // k odd
CheckReport check_gauge_covariance(int k, int n_lo, int n_hi, int mu_samples = 3,
                                   std::uint64_t seed = 42);  // k even

struct SuiteOptions {
    std::vector<int> ks;
    std::uint64_t seed = 42;
    bool parallel = true;  // checks are independent jobs; merge order is fixed either way
    std::vector<std::string> checks;  // check ids to run; empty = all
};

// check ids accepted by SuiteOptions::checks, alphabetical
const std::vector<std::string>& suite_check_ids();

struct SuiteResult {
    std::vector<CheckReport> reports;  // ordered by (check id, k, n_lo)
    bool any_violated = false;
    bool any_unknown = false;
};

// Runs every check that applies to each k at its default range.
SuiteResult run_suite(const SuiteOptions& opts);

// One JSON object per (check, k, n) instance.  Timings are opt-in so the
// default output is byte-identical across runs.
std::string reports_jsonl(const std::vector<CheckReport>& reports, bool include_timings = false);
// Summary table: one row per check report.
std::string reports_csv(const std::vector<CheckReport>& reports, bool include_timings = false);

}  // namespace elab::verify
