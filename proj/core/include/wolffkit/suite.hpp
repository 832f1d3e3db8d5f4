#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace wolffkit {

// One row of the verification battery.  `observed` is the headline number of
// the check, compared against `limit` (a tolerance, threshold, or exact
// target depending on the row).  Wall time is reported for budget checks but
// kept out of the CSV so that output bytes stay run-independent.
struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double observed = 0.0;
    double limit = 0.0;
    double budget = 0.0;  // wall-time allowance in seconds, 0 = none
    double seconds = 0.0;
    std::string detail;
};

struct SuiteOptions {
    int threads = 1;
    // Invoked after each criterion finishes; for progress reporting.
    std::function<void(const CriterionResult&)> on_result;
};

struct SuiteReport {
    std::vector<CriterionResult> results;

    bool all_passed() const;
    // criterion,name,passed,observed,limit,detail rows and a '#' summary
    // line.  Deliberately timing-free: two runs with the same inputs must
    // produce identical bytes.
    void write_csv(std::ostream& out) const;
};

// Runs the full verification battery: closed forms, scaling laws, the
// composition and capacity comparisons, the solver dichotomy, and the
// determinism cross-run.  Every tolerance is fixed here, not configurable.
SuiteReport run_acceptance_suite(const SuiteOptions& opts = {});

}  // namespace wolffkit
