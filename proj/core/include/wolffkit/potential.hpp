#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "wolffkit/common.hpp"
#include "wolffkit/measure.hpp"

namespace wolffkit {

// Upper integration limit for the radial potential.
struct Truncation {
    enum class Kind { full, fixed_radius, distance_adapted };
    Kind kind = Kind::full;
    double radius = 0.0;  // fixed_radius
    double delta = 1.0;   // distance_adapted: limit = delta * dist(x, boundary)
    Box domain;           // distance_adapted

    static Truncation full() { return {}; }
    static Truncation fixed(double r);
    static Truncation adapted(double delta, Box domain);
};

enum class TailMode { analytic, none };

// Nodes are log-uniform on [r_min, r_max]; exact atom-distance breakpoints
// are spliced in with two-sided values so that the step discontinuities of
// r -> mu(B_r(x)) do not smear across a trapezoid cell.  r_min = 0 or
// r_max = 0 selects the automatic window:
//   r_min = min(h/4, nearest-atom-distance/8), r_max = 2 * (support diameter
//   + dist(x, support)).
// Mass beyond r_max is handled by the closed-form power-law tail when
// tail == analytic (mu(B_r) is constant there); tail == none integrates the
// node window only.
struct QuadratureRule {
    double r_min = 0.0;
    double r_max = 0.0;
    int nodes = 512;
    TailMode tail = TailMode::analytic;
};

struct PotentialParams {
    int dim = 0;
    double alpha = 1.0;
    double beta = 2.0;
    Truncation trunc;

    double kernel_order() const { return alpha * beta; }
    // Throws ParameterError: alpha <= 0, beta < 1 + 1e-6, or a full-range
    // potential with kernel order >= dim (divergent tail).
    void validate() const;
};

// Wolff potential of a nonnegative measure at x:
//   int_0^limit (mu(B_r(x)) / r^{N - alpha*beta})^{1/(beta-1)} dr/r
// Returns +infinity when x carries an atom (the head integral diverges) or
// when the head sum overflows the sentinel threshold.
double wolff(const DiscreteMeasure& m, const PotentialParams& p,
             const QuadratureRule& q, std::span<const double> x);

// Riesz potential in radial form, int_0^limit nu(B_r(x)) r^{-(N-order)} dr/r.
// Identical to the beta = 2 Wolff potential with alpha = order/2; this
// function literally calls it, so the two agree bit for bit on shared nodes.
double riesz(const DiscreteMeasure& m, double order, const Truncation& trunc,
             const QuadratureRule& q, std::span<const double> x);

// Direct kernel sum  sum_i w_i |x - y_i|^{order - N}  over atoms and cells.
// For a full-range potential this equals (N - order) times the radial form;
// kept as the normalization cross-check.
double riesz_kernel_sum(const DiscreteMeasure& m, double order, std::span<const double> x);

// Regular evaluation lattice: node(i) = lo + (i + shift) * step per axis.
struct Lattice {
    Box box;
    std::vector<int> shape;
    double shift = 0.5;

    int dim() const { return static_cast<int>(shape.size()); }
    std::size_t node_count() const;
    double step(int axis) const;
    bool uniform_step() const;
    void node(std::size_t flat, double* out) const;
    void validate() const;
};

struct GridFunction {
    Lattice lattice;
    std::vector<double> values;

    double sup() const;
    std::size_t sentinel_count() const;  // +inf entries
    GridFunction power(double q) const;  // nodewise value^q
    // Nodal values become cell densities on the same geometry (cell mass =
    // value * step^N).  Requires finite values and a uniform step.
    GridDensity to_density() const;
    void write_csv(std::ostream& out) const;  // x_1,...,x_N,value rows
};

// Evaluates the potential over the lattice.  Chunks of nodes may run on
// worker threads; each node's quadrature runs in a fixed order, so the field
// does not depend on the thread count.
GridFunction wolff_field(const DiscreteMeasure& m, const PotentialParams& p,
                         const QuadratureRule& q, const Lattice& lattice,
                         int threads = 1);

std::vector<double> wolff_at(const DiscreteMeasure& m, const PotentialParams& p,
                             const QuadratureRule& q,
                             const std::vector<Point>& points, int threads = 1);

// Centered maximal function sup_{r > 0} (1/omega(B_r(x))) int_{B_r} |f| domega.
// omega has finite support, so the supremum is attained among balls through
// support points; the sweep is exact.  Throws DataError when omega has zero
// total mass.
double maximal_function(const DiscreteMeasure& omega,
                        const std::function<double(std::span<const double>)>& f,
                        std::span<const double> x);

}  // namespace wolffkit
