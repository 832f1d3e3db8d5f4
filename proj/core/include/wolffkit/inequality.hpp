#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "wolffkit/common.hpp"
#include "wolffkit/measure.hpp"
#include "wolffkit/potential.hpp"

namespace wolffkit {

// Nondecreasing step function on (0, inf): value(r) = values[k] on
// (breaks[k], breaks[k+1]], constant beyond the last breakpoint.
// breaks[0] must be 0 and values.size() == breaks.size().
struct StepFunction {
    std::vector<double> breaks;
    std::vector<double> values;

    double value(double r) const;
    void validate() const;  // ParameterError on decreasing or negative data
    static StepFunction constant(double c);
};

// Integral comparison probe
//   int_0^R t^kappa (int_t^R h(r) r^theta dr/r)^gamma dt/t
//     vs  int_0^{2R} t^{kappa + theta*gamma} h(t)^gamma dt/t.
struct HardyProbe {
    double kappa = 1.0;
    double gamma = 1.0;
    double theta = 1.0;
    double R = 1.0;
    StepFunction h = StepFunction::constant(1.0);
};

struct SampleRow {
    Point x;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

struct InequalityReport {
    std::string check;
    std::vector<SampleRow> rows;
    double lhs = 0.0;   // scalar checks
    double rhs = 0.0;
    double min_ratio = kInfinity;
    double max_ratio = 0.0;
    double constant = kInfinity;      // constructive bound when one is known
    std::vector<double> refinement;   // headline ratio at successive refinements
    bool hypothesis_ok = true;
    bool divergent = false;
    bool passed = false;

    // header, one line per sample, then '#'-prefixed summary lines
    void write_csv(std::ostream& out) const;
};

// Both sides of the probe integral.  The inner integral is exact piecewise
// power-law; the outer one is exact for integer gamma (binomial expansion,
// with the log-power primitive at theta = 0) and falls back to a log-spaced
// trapezoid otherwise.  The reported constant is 2^{gamma/4} max{1,
// 2^{-gamma*theta/4}} / kappa for gamma <= 1 and ((gamma-1)/gamma)^{gamma-1}
// / (kappa - gamma) for gamma > 1 (only valid when kappa > gamma; otherwise
// no constructive constant is reported and the bound is not asserted).
InequalityReport hardy_check(const HardyProbe& probe);

// Shared knobs for the potential-composition checks.
struct ComposeParams {
    double alpha = 1.0;
    double beta = 2.0;
    double q = 1.0;
    double radius = 0.0;   // truncation R; 0 = 2 * scene diameter
    int grid = 33;         // inner-field lattice nodes per axis
    int nodes = 512;       // quadrature nodes
    int samples = 16;
    std::uint64_t seed = 7;
    int threads = 1;
};

// Parameters of the single potential that matches the composed one:
// (alpha*beta*(q+beta-1)/(q+(beta-1)^2), (beta-1)^2/q + 1).
PotentialParams composite_params(int dim, double alpha, double beta, double q);
// Kernel order of the composite potential, alpha*beta*(q+beta-1)/q.
double composite_order(double alpha, double beta, double q);
// Upper limit N*(beta-1)/(N - alpha*beta) for the reverse bound.
double subcritical_limit(int dim, double alpha, double beta);

// Composite potential at truncation R/2 against the composed potential at
// truncation R; reports min over samples of composed/composite (the observed
// reciprocal constant) at params.nodes and again at doubled nodes.
InequalityReport compose_lower_check(const DiscreteMeasure& m, const ComposeParams& params);

// Composed potential at truncation R against the composite at 4R; requires
// q strictly below the subcritical limit.  Reports the max ratio.
InequalityReport compose_upper_check(const DiscreteMeasure& m, const ComposeParams& params);

// Distance-adapted variant on a box domain: composite truncated at
// delta*d(x)/2 against the composed potential with inner truncation
// delta*d(.) and outer delta*d(x).  Samples are drawn inside the domain.
InequalityReport compose_adapted_check(const DiscreteMeasure& m, const ComposeParams& params,
                                       const Box& domain, double delta);

struct CombinationParams {
    double alpha = 1.0;
    double beta = 2.0;
    double q = 2.0;
    double s = 2.0;
    double radius = 0.0;      // 0 = 2 * scene diameter
    double threshold = 1.0;   // admissible mass/capacity ratio on the family
    int grid = 33;
    int nodes = 512;
    int samples = 8;
    int levels = 6;           // dyadic family depth
    std::uint64_t seed = 7;
    int threads = 1;
    double h = 0.0625;        // capacity resolution for the family check
};

// Triple composition against the single potential of
// omega = (W[mu])^s dx + eta, after testing the capacitary hypothesis
// omega(K) <= threshold * Cap on a dyadic ball family (mass/capacity ratios
// when the capacity order A*s is below the dimension, the scaling surrogate
// omega(B_rho) <= threshold * rho^{N - A*s} otherwise).  The composition is
// still evaluated when the hypothesis fails; the report carries the flag.
InequalityReport combination_check(const DiscreteMeasure& mu, const DiscreteMeasure& eta,
                                   const CombinationParams& params);

// Fixed-seed sample measure: `count` atoms uniform in the unit box with
// weights uniform in [0.1, 1].
DiscreteMeasure random_atom_measure(int dim, int count, std::uint64_t seed);

}  // namespace wolffkit
