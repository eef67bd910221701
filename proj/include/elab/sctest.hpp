#pragma once

#include <string>
#include <vector>

#include "elab/laurent.hpp"

namespace elab::sc {

enum class SCVerdict { confined, non_confined, indeterminate };

std::string verdict_name(SCVerdict v);

// One perturbed run x_{-1} = u, x_0 = eps.  The orbit passes the test when
// some step's valuation returns to exactly 0: the limit as eps -> 0 is then
// finite and, for this family, remembers u.  Steps of positive valuation do
// not count (their limit is 0 and carries no memory).
struct SCReport {
    int k = 0;
    mpq_class u;
    std::vector<long> valuations;  // of x_0, x_1, ... as far as computed
    SCVerdict verdict = SCVerdict::indeterminate;
    int step = -1;        // confinement step, or the step that exhausted the window
    mpq_class limit;      // constant term at the confinement step
    int horizon = 0;
    int order_requested = 0;
    int order_used = 0;   // after any window widening
    int widenings = 0;
};

// iterate the family map over the series ring and classify the run; a
// window exhausted mid-run widens the order (doubling, up to 4 times)
// before the verdict degrades to indeterminate
SCReport sc_run(int k, const mpq_class& u, int order = 48, int horizon = 12);

// conjunction over at least two distinct seeds: confined only when every
// run confines at the same step with pairwise-distinct limits (the orbit
// recovered the seed information), non_confined only when every run fails;
// anything mixed stays indeterminate
SCVerdict classify(int k, const std::vector<mpq_class>& seeds, int order = 48, int horizon = 12);

std::string sc_report_to_json(const SCReport& rep);

}  // namespace elab::sc
