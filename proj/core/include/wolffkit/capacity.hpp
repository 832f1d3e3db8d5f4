#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wolffkit/common.hpp"
#include "wolffkit/measure.hpp"

namespace wolffkit {

// Nonlinear capacity Cap(K) = inf{ int f^s weight dx : f >= 0,
// I_A[f weight] >= 1 on K } with kernel |x|^{A-N}.  kind selects the weight
// and the kernel reach: riesz is unweighted and full range, bessel truncates
// the kernel at bessel_scale (the small-scale equivalent of the smoothed
// kernel), weighted_halfspace uses weight x_N on the upper half-space.
enum class CapacityKind { riesz, bessel, weighted_halfspace };

struct CapacityParams {
    CapacityKind kind = CapacityKind::riesz;
    double alpha = 1.0;  // kernel order A
    double s = 2.0;
    double bessel_scale = 1.0;

    void validate() const;
};

enum class CapacityMethod { variational, ball_scaling, zero_criterion };

struct CapacityEstimate {
    double value = 0.0;
    CapacityMethod method = CapacityMethod::variational;
    std::optional<double> reference;  // Cap of the unit ball behind a scaling
    double resolution = 0.0;
    int iterations = 0;
    bool converged = true;
};

// All compacts are null for the Riesz capacity iff the kernel order reaches
// the dimension.
bool capacity_zero_test(const CapacityParams& p, int dim);

// A single point has positive capacity iff the kernel order strictly exceeds
// the dimension; meaningful for the truncated (bessel) kind only.
bool point_capacity_positive(const CapacityParams& p, int dim);

struct SolveOptions {
    int iterations = 2000;
    double tol = 1e-3;     // feasibility slack on the constraint nodes
    double step = 0.0;     // 0 = automatic; decays as step/k
    double penalty = 0.0;  // 0 = automatic
    int threads = 1;
    // Thickness of the support slab above a boundary set (0 = automatic).
    double support_depth = 0.0;
};

// Projected subgradient solve of the discretized program on spacing h.
// Balls in three dimensions with an unweighted kernel run on the exact
// radial shell matrix; everything else runs on a cell lattice.  The value is
// the objective of the best iterate rescaled to exact feasibility, hence an
// upper bound on the discrete capacity.
CapacityEstimate capacity_variational(const CapacityParams& p, const Region& K,
                                      double h, const SolveOptions& opts = {});

// Ball capacity through the scaling identity Cap(B_rho) =
// rho^{N - A s} Cap(B_1).  The unit-ball reference is one variational solve,
// cached across runs.  Riesz with A >= N returns the zero estimate; riesz
// with A < N <= A s has no finite-energy ball regime and is rejected.  The
// truncated kind scales only below bessel_scale and returns the flat
// point-capacity reference once the kernel order exceeds the dimension.
CapacityEstimate capacity_ball(const CapacityParams& p, double rho, int dim,
                               double h = 0.0625, const SolveOptions& opts = {});

// Reference cache, lines "N A s h value iterations converged"; the location
// is capcache.txt under the working directory unless WOLFFKIT_CACHE points
// elsewhere.
std::string capacity_cache_path();

struct ConditionRecord {
    Point center;
    double radius = 0.0;
    double mass = 0.0;
    double capacity = 0.0;
    double ratio = 0.0;  // +inf marks mass on a null set
};

struct ConditionReport {
    std::vector<ConditionRecord> records;
    double max_ratio = 0.0;
    bool mass_on_null_set = false;
    // Ratios grew by > 10x across three dyadic shrinks at some center.
    bool diverging = false;
    std::optional<double> threshold;
    bool passed = true;
};

// Ratio sweep omega(E)/Cap(E) over a ball family; the smallest admissible
// constant in the capacitary condition is the max ratio.
ConditionReport condition_check(const DiscreteMeasure& omega, const CapacityParams& p,
                                const std::vector<Region>& family,
                                std::optional<double> threshold = std::nullopt,
                                double h = 0.0625);

// Dyadic test family: balls of radii base_radius * 2^{-j}, j = 0..levels-1,
// centered at support points of omega (atoms first, then occupied cells,
// strided down to max_centers).
std::vector<Region> dyadic_ball_family(const DiscreteMeasure& omega, double base_radius,
                                       int levels, std::size_t max_centers = 4);

}  // namespace wolffkit
