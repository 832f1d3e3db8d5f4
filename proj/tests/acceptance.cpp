// Verification battery runner: one pass/fail line per criterion, nonzero
// exit when anything fails.  All tolerances live in the library battery.
#include <cstdio>

#include "wolffkit/suite.hpp"

int main() {
    wolffkit::SuiteOptions opts;
    opts.on_result = [](const wolffkit::CriterionResult& r) {
        std::printf("[%s] %2d %-18s observed %-12.6g limit %-10.6g %6.2f s  %s\n",
                    r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.observed, r.limit,
                    r.seconds, r.detail.c_str());
        std::fflush(stdout);
    };
    const wolffkit::SuiteReport rep = wolffkit::run_acceptance_suite(opts);
    int npass = 0;
    for (const auto& r : rep.results)
        if (r.passed) ++npass;
    std::printf("%d/%zu criteria passed\n", npass, rep.results.size());
    return rep.all_passed() ? 0 : 1;
}
