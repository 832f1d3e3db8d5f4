#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wolffkit/capacity.hpp"
#include "wolffkit/common.hpp"
#include "wolffkit/inequality.hpp"
#include "wolffkit/measure.hpp"
#include "wolffkit/potential.hpp"

namespace wolffkit {

// Measure on the closed upper half-space: an interior part in R^N plus a
// boundary part carried in N-1 coordinates (a measure on the hyperplane
// x_N = 0).  The weight rho(x) = x_N is applied by the checks, not stored.
struct HalfspaceMeasure {
    int dim = 3;  // ambient dimension N
    DiscreteMeasure interior;
    DiscreteMeasure boundary;

    bool empty() const;
    // DataError when an interior atom has x_N <= 0 or the interior density
    // reaches below the hyperplane; ParameterError on dimension mismatches.
    void validate() const;
    // Single N-dimensional measure: the interior part as-is, boundary atoms
    // embedded at x_N = 0, boundary density cells collapsed to atoms at
    // their centers on the hyperplane.
    DiscreteMeasure flattened() const;
};

// x_N / |x - (z, 0)|^N for x strictly inside the half-space (z has N-1
// coordinates).  ParameterError when x sits on the boundary.
double poisson_kernel(std::span<const double> x, std::span<const double> z);

// x_N y_N / (|x - y|^{N-2} max{|x - y|, x_N, y_N}^2) for interior x, y;
// +infinity at x == y.  Symmetric in its arguments.
double green_kernel_comparison(std::span<const double> x, std::span<const double> y);

// Kernel sums over atoms and density cells in canonical order.  sigma lives
// on the boundary (N-1 coordinates); f lives in the interior (N coordinates).
double poisson_potential(const DiscreteMeasure& sigma, std::span<const double> x);
double green_potential(const DiscreteMeasure& f, std::span<const double> x);

// Wolff parameters ((q1+2)/(q1+1), (q1+1)/q1) whose potential majorizes the
// composition I_2[(I_1[.])^{q1}].  Truncation left untouched.
PotentialParams halfspace_composite_params(int dim, double q1);

struct HalfspaceParams {
    double q1 = 1.0;
    double q2 = 2.0;
    double radius = 0.0;          // shared truncation R; 0 = 2 * scene diameter
    std::vector<Point> points;    // explicit samples; empty = draw from the scene cube
    int samples = 8;
    int grid = 25;                // inner-field lattice nodes per axis
    int nodes = 256;              // quadrature nodes (second pass doubles them)
    int levels = 4;               // dyadic family depth
    std::size_t max_centers = 4;
    double base_radius = 0.25;    // largest family radius
    double growth_constant = 1.0; // admissible constant in the ball-growth bound
    std::optional<double> threshold;  // trace verdict threshold
    double h = 0.0625;            // capacity resolution on the base-radius ball
    std::uint64_t seed = 7;
    int threads = 1;
};

// I_2[(I_1[omega])^{q1}] against the composite Wolff potential of omega.
// All three potentials share one truncation radius: the untruncated right
// side diverges once the composite order (q1+2)/q1 reaches the dimension.
// Reports the max ratio over samples at params.nodes and at doubled nodes.
// ParameterError unless 0 < q1 < N/(N-1).
InequalityReport riesz_compose_check(const HalfspaceMeasure& omega,
                                     const HalfspaceParams& params);

// I_1[(W[omega])^{q2} rho chi_+] against I_1[omega], W the composite
// potential above, every potential truncated at the shared radius.  The
// ball-growth hypothesis
//   omega(B_t(x)) <= growth_constant * t^{N - A s'} / max{x_N, t}^{1/(q1 q2 - 1)},
// A = (q1+2)/q1, s' = q1 q2/(q1 q2 - 1), is swept over a dyadic family first
// and lands in hypothesis_ok.  ParameterError unless q1 >= 1 and q1 q2 > 1.
InequalityReport weighted_estimate_check(const HalfspaceMeasure& omega,
                                         const HalfspaceParams& params);

// Weighted half-space capacity of base x {0} against the (N-1)-dimensional
// Riesz capacity of base with kernel order alpha + 2/s' - 1 (both sides
// scale with the same exponent N + 1 - (alpha+1)s).  Solved at h and h/2;
// the two ratios land in refinement and passed demands agreement within a
// factor 2.  ParameterError unless the kernel order lies in (0, N-1).
InequalityReport boundary_capacity_equiv_check(const Box& base, double alpha, double s,
                                               double h = 0.0625,
                                               const SolveOptions& opts = {});

// Trace conditions for boundary data (sigma1, sigma2), both in N-1
// coordinates.  Interior condition: on tangent balls B_t((z, t)) over
// support points z of sigma1,
//   int_B x_N (P[sigma1])^{q2} dx <= threshold * Cap^rho_{(q1+2)/q1, s'}(B);
// boundary condition: sigma2(B) <= threshold * Cap_{I_{2(q2+1)/(q1 q2)}, s'}(B)
// on dyadic boundary balls.  Records carry N-dimensional centers for the
// interior family and N-1 for the boundary one; the integral fills the mass
// column.  Per-ball solves run at resolution h * t / base_radius, so every
// level sees the same relative resolution.  ParameterError unless
// 1 <= q1 < N/(N-1) and q1 q2 > 1; a nonempty sigma1 additionally needs
// (q1+2)/q1 < N to keep the interior kernel order below the dimension.
ConditionReport trace_condition_check(const DiscreteMeasure& sigma1,
                                      const DiscreteMeasure& sigma2,
                                      const HalfspaceParams& params);

}  // namespace wolffkit
