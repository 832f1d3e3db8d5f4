#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "wolffkit/common.hpp"
#include "wolffkit/measure.hpp"
#include "wolffkit/potential.hpp"

namespace wolffkit {

enum class OperatorKind { p_laplace, k_hessian };

// Wolff parameterization of the k-Hessian operator: (2k/(k+1), k+1).
PotentialParams hessian_params(int k, int dim);

// Coupled system -L u = v^q1 + mu, -L v = u^q2 + eta where L is the
// p-Laplacian or the k-Hessian.  For k_hessian the exponent pair (q1, q2)
// plays the role of (s1, s2).  Data measures with density parts must live on
// the evaluation lattice geometry.
struct SystemSpec {
    OperatorKind op = OperatorKind::p_laplace;
    double p = 2.0;  // p_laplace only
    int k = 1;       // k_hessian only
    double q1 = 2.0;
    double q2 = 2.0;
    int dim = 3;
    DiscreteMeasure mu;
    DiscreteMeasure eta;
    bool whole_space = false;
    Box domain = Box::cube(3, -0.5, 0.5);  // evaluation box; truncation R = 2 diam
    double c_star = 1.0;  // representation constant
    double c71 = 1.0;     // calibration constant inside the smallness threshold

    double alpha() const;  // 1 or 2k/(k+1)
    double beta() const;   // p or k+1
    // base potential: full range on the whole space, else fixed R = 2 diam.
    PotentialParams potential() const;
    void validate() const;
};

// Constants of the a-priori iteration bounds, from the exponents and c_star:
//   c68 = c* 2^{1/(b-1)}
//   c69 = c* 2^{1+1/(b-1)} (c68^s 2^{s-1} + 1)^{1/(b-1)}
//   c70 = c* 2^{1/(b-1)} c69^{q/(b-1)}
//   m_star solves c* 2^{1/(b-1)} (c70^s 2^{s-1})^{1/(b-1)} c71 M^{qs/(b-1)^3}
//     = c69/2
// with b = beta, q = q1, s = q2.
struct IterationConstants {
    double c68 = 0.0;
    double c69 = 0.0;
    double c70 = 0.0;
    double m_star = 0.0;

    static IterationConstants compute(const SystemSpec& spec);
};

struct IterationState {
    int m = 0;
    GridFunction u;
    GridFunction v;
    double sup_u = 0.0;
    double sup_v = 0.0;
    double increment = kInfinity;  // max nodewise change from the previous state
    bool monotone = true;          // nodewise u >= previous u, same for v
    bool bound_ok = true;          // iterate below the a-priori bound fields
    double bound_margin = 0.0;     // max nodewise iterate/bound ratio
};

struct IterateOptions {
    int max_m = 50;
    bool monotone_mode = true;  // record monotonicity violations
    double tol_conv = 1e-6;
    double ceiling = 1e12;  // sup-norm overflow guard
    QuadratureRule rule;
    int threads = 1;
};

// Picard scheme from (u_0, v_0) = 0:
//   u_{m+1} = c* W[v_m^q1 dx + mu],  v_{m+1} = c* W[u_m^q2 dx + eta].
// Each new state is checked nodewise against the bound fields
//   v <= c69 W[omega],  u <= c70 W[(W[omega])^q1] + c68 W[mu],
// where d(omega) = (W[mu])^q2 dx + d(eta).  Stops on sup increment below
// tol_conv (converged), on a bound violation or sup above the ceiling
// (diverged), or at max_m.  Fixed-point residuals sup|u - c*W[v^q1 + mu]| /
// sup u (and symmetrically) are evaluated only for converged runs.
// A lattice node on a data atom makes the potential diverge there: DataError.
struct IterationRun {
    std::vector<IterationState> states;  // states[0] is the zero start
    IterationConstants constants;
    bool converged = false;
    bool diverged = false;
    double residual_u = 0.0;
    double residual_v = 0.0;

    const IterationState& last() const { return states.back(); }
    // m,sup_u,sup_v,increment,bound_margin rows, then '#' summary lines
    void write_csv(std::ostream& out) const;
};

IterationRun picard_iterate(const SystemSpec& spec, const Lattice& lattice,
                            const IterateOptions& opts = {});

// Nodewise ratios of a computed state against the bound fields, with the
// constants scaled by `constant_scale` (a shrunk bound is the negative
// control).  Zero data gives 0/0 rows, reported as a vacuous pass.
struct BoundReport {
    double u_ratio = 0.0;
    double v_ratio = 0.0;
    bool passed = false;
};

BoundReport solution_bounds(const SystemSpec& spec, const Lattice& lattice,
                            const IterationState& state, const IterateOptions& opts = {},
                            double constant_scale = 1.0);

// Liouville region of the exponent pair: true when
//   p (q1 q2 + (p-1) max{q1,q2}) / (q1 q2 - (p-1)^2) >= N     (p_laplace)
//   2k (q1 q2 + k max{q1,q2}) / (q1 q2 - k^2)        >= N     (k_hessian)
// i.e. only the trivial nonnegative supersolution pair exists.
// ParameterError when q1 q2 <= (p-1)^2 (resp. k^2).
bool liouville_check(const SystemSpec& spec);

// Subcritical range of the leading exponent: q1 < N(p-1)/(N-p) for the
// p-Laplacian; q1 < Nk/(N-2k) for the k-Hessian, with q1 >= k additionally
// required on bounded domains.  Strict on the right.
bool subcritical_check(const SystemSpec& spec);

// Explicit radial majorant a^{1/(p-1)} (|x-x0|^{-(N-p)/(p-1)}
// - R^{-(N-p)/(p-1)})_+ of the truncated potential of a point mass a at x0.
// R may be infinite.
double corollary_d_majorant(double a, const Point& x0, double p, int dim, double R,
                            const Point& x);

// --------- run configuration ---------

struct RunConfig {
    SystemSpec spec;
    int grid = 33;
    double shift = 0.25;  // keeps lattice nodes off centered atoms
    int max_m = 50;
    double tol_conv = 1e-6;
    bool monotone_mode = true;
    int nodes = 512;
    int threads = 1;
    std::string mu_path;   // optional measure files, loaded by the caller
    std::string eta_path;

    Lattice lattice() const;
    IterateOptions options() const;
};

// key = value lines ('#' comments, blank lines allowed).  Keys: operator
// (p-laplace|k-hessian), p, k, q1, q2 (aliases s1, s2), dim, c_star, c71,
// domain (whole-space|box), box_lo, box_hi (dim reals), grid, shift, max_m,
// tol_conv, mode (monotone|plain), nodes, threads, mu, eta.  Unknown keys or
// unparsable values raise ParameterError.
RunConfig parse_run_config(std::istream& in);

}  // namespace wolffkit
