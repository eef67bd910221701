// Times the three multiplication kernels (serial reference, OpenMP, and
// Kronecker-packed) on operand sizes that come up while extending factor
// chains, and checks that they agree bitwise.  Usage: bench-kernels [threads]

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "elab/hvmap.hpp"
#include "elab/poly.hpp"

using elab::HomoPoly;
using elab::MulKernel;

namespace {

double best_of(int reps, MulKernel kernel, const HomoPoly& f, const HomoPoly& g, HomoPoly& out) {
    double best = 1e30;
    for (int r = 0; r < reps; ++r) {
        double t0 = omp_get_wtime();
        out = HomoPoly::mul(f, g, kernel);
        double ms = (omp_get_wtime() - t0) * 1e3;
        if (ms < best) best = ms;
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    int threads = argc > 1 ? std::atoi(argv[1]) : 0;
    if (threads > 0) {
        omp_set_num_threads(threads);
        elab::set_poly_threads(threads);
    }
    std::printf("threads: %d\n", omp_get_max_threads());

    struct Case {
        std::string label;
        HomoPoly f, g;
    };
    std::vector<Case> cases;
    HomoPoly p2 = elab::hv::iterate_pn(2, 2);
    HomoPoly p3 = elab::hv::iterate_pn(2, 3);
    HomoPoly p4 = elab::hv::iterate_pn(2, 4);
    cases.push_back({"p_2 * p_2   (deg 9*9)", p2, p2});
    cases.push_back({"p_3 * p_3   (deg 27*27)", p3, p3});
    cases.push_back({"p_4 * p_3   (deg 81*27)", p4, p3});
    cases.push_back({"p_4 * p_4   (deg 81*81)", p4, p4});
    elab::hv::FactorChain chain(2, elab::hv::ChainSeeds::with_b);
    chain = elab::hv::extend_chain_to(std::move(chain), 5);
    const HomoPoly& e5 = chain.at(5);
    cases.push_back({"e_5 * e_5   (deg 168*168)", e5, e5});
    HomoPoly e5sq = HomoPoly::mul(e5, e5);
    cases.push_back({"e_5^2 * e_5 (deg 336*168)", e5sq, e5});

    std::printf("%-26s %8s %8s %10s %10s %10s %8s %8s  %s\n", "case", "terms_f", "terms_g",
                "serial_ms", "omp_ms", "packed_ms", "omp_x", "packed_x", "agree");
    const int reps = 3;
    bool all_agree = true;
    for (const auto& c : cases) {
        HomoPoly rs, ro, rp;
        double ts = best_of(reps, MulKernel::Serial, c.f, c.g, rs);
        double to = best_of(reps, MulKernel::Omp, c.f, c.g, ro);
        double tp = best_of(reps, MulKernel::Packed, c.f, c.g, rp);
        bool agree = rs == ro && rs == rp;
        all_agree = all_agree && agree;
        std::printf("%-26s %8zu %8zu %10.3f %10.3f %10.3f %7.2fx %7.2fx  %s\n", c.label.c_str(),
                    c.f.term_count(), c.g.term_count(), ts, to, tp, ts / to, ts / tp,
                    agree ? "yes" : "NO");
    }
    if (!all_agree) {
        std::printf("kernel disagreement detected\n");
        return 1;
    }
    return 0;
}
