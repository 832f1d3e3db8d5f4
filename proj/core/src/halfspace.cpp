#include "wolffkit/halfspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "scene.hpp"

namespace wolffkit {

// --------- halfspace measures ---------

bool HalfspaceMeasure::empty() const { return interior.empty() && boundary.empty(); }

void HalfspaceMeasure::validate() const {
    if (dim < 2 || dim > 3)
        throw ParameterError("halfspace measure needs ambient dimension 2 or 3");
    if (!interior.empty() && interior.dim != dim)
        throw ParameterError("interior part must live in the ambient dimension");
    if (!boundary.empty() && boundary.dim != dim - 1)
        throw ParameterError("boundary part must live in N-1 coordinates");
    const std::size_t last = static_cast<std::size_t>(dim - 1);
    for (std::size_t i = 0; i < interior.atom_count(); ++i)
        if (!(interior.atom(i)[last] > 0.0))
            throw DataError("interior atoms must sit strictly above the boundary");
    if (interior.density && interior.density->total_mass() > 0.0 &&
        interior.density->origin[last] < 0.0)
        throw DataError("interior density must not reach below the boundary");
}

DiscreteMeasure HalfspaceMeasure::flattened() const {
    validate();
    DiscreteMeasure out = interior;
    out.dim = dim;
    Point x(static_cast<std::size_t>(dim), 0.0);
    for (std::size_t i = 0; i < boundary.atom_count(); ++i) {
        const auto z = boundary.atom(i);
        std::copy(z.begin(), z.end(), x.begin());
        x.back() = 0.0;
        out.add_atom(x, boundary.atom_weights[i]);
    }
    if (boundary.density) {
        const GridDensity& g = *boundary.density;
        const double cv = g.cell_volume();
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            if (g.values[c] == 0.0) continue;
            g.cell_center(c, x.data());
            x.back() = 0.0;
            out.add_atom(x, g.values[c] * cv);
        }
    }
    out.canonicalize();
    return out;
}

// --------- kernels ---------

double poisson_kernel(std::span<const double> x, std::span<const double> z) {
    const std::size_t n = x.size();
    if (n < 2 || z.size() + 1 != n)
        throw ParameterError("poisson kernel needs x in R^N and z in R^{N-1}");
    const double height = x[n - 1];
    if (!(height > 0.0))
        throw ParameterError("poisson kernel needs x strictly inside the half-space");
    double d2 = height * height;
    for (std::size_t d = 0; d + 1 < n; ++d) {
        const double diff = x[d] - z[d];
        d2 += diff * diff;
    }
    return height * std::pow(d2, -0.5 * static_cast<double>(n));
}

double green_kernel_comparison(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n)
        throw ParameterError("green comparison needs two points of a shared dimension");
    const double xn = x[n - 1];
    const double yn = y[n - 1];
    if (!(xn > 0.0) || !(yn > 0.0))
        throw ParameterError("green comparison needs interior points");
    double d2 = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
        const double diff = x[d] - y[d];
        d2 += diff * diff;
    }
    if (d2 == 0.0) return kInfinity;
    const double dist = std::sqrt(d2);
    const double m = std::max(dist, std::max(xn, yn));
    return xn * yn / (std::pow(dist, static_cast<double>(n) - 2.0) * m * m);
}

double poisson_potential(const DiscreteMeasure& sigma, std::span<const double> x) {
    if (sigma.dim + 1 != static_cast<int>(x.size()))
        throw ParameterError("poisson potential needs a boundary measure in N-1 coordinates");
    double out = 0.0;
    for (std::size_t i = 0; i < sigma.atom_count(); ++i)
        out += sigma.atom_weights[i] * poisson_kernel(x, sigma.atom(i));
    if (sigma.density) {
        const GridDensity& g = *sigma.density;
        const double cv = g.cell_volume();
        Point c(static_cast<std::size_t>(g.dim()));
        for (std::size_t i = 0; i < g.cell_count(); ++i) {
            if (g.values[i] == 0.0) continue;
            g.cell_center(i, c.data());
            out += g.values[i] * cv * poisson_kernel(x, c);
        }
    }
    return out;
}

double green_potential(const DiscreteMeasure& f, std::span<const double> x) {
    if (f.dim != static_cast<int>(x.size()))
        throw ParameterError("green potential needs an interior measure in N coordinates");
    double out = 0.0;
    for (std::size_t i = 0; i < f.atom_count(); ++i)
        out += f.atom_weights[i] * green_kernel_comparison(x, f.atom(i));
    if (f.density) {
        const GridDensity& g = *f.density;
        const double cv = g.cell_volume();
        Point c(static_cast<std::size_t>(g.dim()));
        for (std::size_t i = 0; i < g.cell_count(); ++i) {
            if (g.values[i] == 0.0) continue;
            g.cell_center(i, c.data());
            out += g.values[i] * cv * green_kernel_comparison(x, c);
        }
    }
    return out;
}

PotentialParams halfspace_composite_params(int dim, double q1) {
    if (!(q1 > 0.0)) throw ParameterError("composition exponent must be positive");
    PotentialParams p;
    p.dim = dim;
    p.alpha = (q1 + 2.0) / (q1 + 1.0);
    p.beta = (q1 + 1.0) / q1;
    return p;
}

// --------- sampled comparisons ---------

namespace {

struct Scene {
    Box cube;
    double R = 0.0;
    std::vector<Point> pts;
};

Scene make_scene(const DiscreteMeasure& flat, const HalfspaceParams& hp) {
    Scene s;
    s.cube = detail::scene_cube(flat.support_box());
    s.R = hp.radius > 0.0 ? hp.radius : 2.0 * s.cube.diameter();
    if (hp.points.empty()) {
        if (hp.samples < 1) throw ParameterError("check needs at least one sample");
        s.pts = detail::sample_points(s.cube, hp.samples, hp.seed);
    } else {
        s.pts = hp.points;
        for (const Point& p : s.pts)
            if (static_cast<int>(p.size()) != flat.dim)
                throw ParameterError("sample dimension mismatch");
    }
    return s;
}

InequalityReport trivial_report(const char* name) {
    InequalityReport rep;
    rep.check = name;
    rep.passed = true;
    return rep;
}

// One refinement pass of an upper bound lhs <= c * rhs: record rows on the
// first pass, return the pass aggregate (max non-vacuous ratio).
double upper_pass(InequalityReport& rep, bool record, const std::vector<Point>& pts,
                  const std::vector<double>& lhs, const std::vector<double>& rhs) {
    double agg = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double ratio = 0.0;
        if (rhs[i] > 0.0) ratio = lhs[i] / rhs[i];
        else if (lhs[i] > 0.0) ratio = kInfinity;
        const bool finite = std::isfinite(lhs[i]) && std::isfinite(rhs[i]);
        const bool vacuous = lhs[i] == 0.0;
        if (record) {
            SampleRow row;
            row.x = pts[i];
            row.lhs = lhs[i];
            row.rhs = rhs[i];
            row.ratio = ratio;
            rep.rows.push_back(std::move(row));
            if (!finite) {
                rep.divergent = true;
            } else if (!vacuous) {
                rep.min_ratio = std::min(rep.min_ratio, ratio);
                rep.max_ratio = std::max(rep.max_ratio, ratio);
            }
        }
        if (finite && !vacuous) agg = std::max(agg, ratio);
    }
    return agg;
}

// Field of m over the lattice raised to `power` and multiplied by the
// weight max{x_N, 0}, as a density measure.  Same re-offset policy as
// detail::densified_power.
DiscreteMeasure weighted_power_density(const DiscreteMeasure& m, const PotentialParams& p,
                                       const QuadratureRule& q, Lattice& lat, double power,
                                       int threads) {
    if (lat.shift == 0.5 && detail::node_on_atom(m, lat)) lat.shift = 0.25;
    GridFunction f = wolff_field(m, p, q, lat, threads);
    if (f.sentinel_count() > 0) {
        lat.shift = 0.25;
        f = wolff_field(m, p, q, lat, threads);
        if (f.sentinel_count() > 0)
            throw DataError("field lattice keeps hitting atoms of the measure");
    }
    GridFunction g = f.power(power);
    Point x(static_cast<std::size_t>(lat.dim()));
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        lat.node(i, x.data());
        g.values[i] *= std::max(x.back(), 0.0);
    }
    DiscreteMeasure out;
    out.dim = lat.dim();
    out.density = g.to_density();
    return out;
}

PotentialParams riesz_params(int dim, double order, const Truncation& tr) {
    PotentialParams p;
    p.dim = dim;
    p.alpha = 0.5 * order;
    p.beta = 2.0;
    p.trunc = tr;
    return p;
}

}  // namespace

InequalityReport riesz_compose_check(const HalfspaceMeasure& omega,
                                     const HalfspaceParams& hp) {
    omega.validate();
    const int n = omega.dim;
    const double limit = n / (n - 1.0);
    if (!(hp.q1 > 0.0 && hp.q1 < limit))
        throw ParameterError("halfspace composition needs q1 in (0, N/(N-1))");
    if (hp.grid < 2) throw ParameterError("composition grid must be at least 2");
    if (omega.empty()) return trivial_report("halfspace-compose");

    const DiscreteMeasure flat = omega.flattened();
    const Scene sc = make_scene(flat, hp);
    const Truncation tr = Truncation::fixed(sc.R);
    const PotentialParams inner = riesz_params(n, 1.0, tr);
    const PotentialParams outer = riesz_params(n, 2.0, tr);
    PotentialParams comp = halfspace_composite_params(n, hp.q1);
    comp.trunc = tr;
    comp.validate();

    InequalityReport rep;
    rep.check = "halfspace-compose";
    for (int pass = 0; pass < 2; ++pass) {
        QuadratureRule rule;
        rule.nodes = hp.nodes << pass;
        Lattice lat = detail::scene_lattice(sc.cube, hp.grid);
        DiscreteMeasure dens = detail::densified_power(flat, inner, rule, lat, hp.q1, hp.threads);
        const auto lhs = wolff_at(dens, outer, rule, sc.pts, hp.threads);
        const auto rhs = wolff_at(flat, comp, rule, sc.pts, hp.threads);
        rep.refinement.push_back(upper_pass(rep, pass == 0, sc.pts, lhs, rhs));
    }
    rep.passed = !rep.divergent && rep.max_ratio < kInfinity;
    return rep;
}

InequalityReport weighted_estimate_check(const HalfspaceMeasure& omega,
                                         const HalfspaceParams& hp) {
    omega.validate();
    const int n = omega.dim;
    if (!(hp.q1 >= 1.0)) throw ParameterError("weighted estimate needs q1 >= 1");
    if (!(hp.q1 * hp.q2 > 1.0)) throw ParameterError("weighted estimate needs q1*q2 > 1");
    if (hp.grid < 2) throw ParameterError("composition grid must be at least 2");
    if (omega.empty()) return trivial_report("weighted-estimate");

    const DiscreteMeasure flat = omega.flattened();
    const Scene sc = make_scene(flat, hp);
    const Truncation tr = Truncation::fixed(sc.R);

    InequalityReport rep;
    rep.check = "weighted-estimate";

    // Ball-growth sweep: mass against t^{N - A s'} / max{x_N, t}^{1/(q1 q2 - 1)}.
    const double sprime = hp.q1 * hp.q2 / (hp.q1 * hp.q2 - 1.0);
    const double growth = n - (hp.q1 + 2.0) / hp.q1 * sprime;
    const double damp = 1.0 / (hp.q1 * hp.q2 - 1.0);
    const auto family = dyadic_ball_family(flat, hp.base_radius, hp.levels, hp.max_centers);
    if (family.empty()) throw ParameterError("ball-growth family is empty");
    BallMassIndex index(flat);
    for (const Region& e : family) {
        const double height = std::max(e.center.back(), 0.0);
        const double bound = hp.growth_constant * std::pow(e.radius, growth) *
                             std::pow(std::max(height, e.radius), -damp);
        if (index.ball_mass(e.center, e.radius) > bound) {
            rep.hypothesis_ok = false;
            break;
        }
    }

    PotentialParams wolffp = halfspace_composite_params(n, hp.q1);
    wolffp.trunc = tr;
    wolffp.validate();
    const PotentialParams first = riesz_params(n, 1.0, tr);
    for (int pass = 0; pass < 2; ++pass) {
        QuadratureRule rule;
        rule.nodes = hp.nodes << pass;
        Lattice lat = detail::scene_lattice(sc.cube, hp.grid);
        DiscreteMeasure dens = weighted_power_density(flat, wolffp, rule, lat, hp.q2, hp.threads);
        const auto lhs = wolff_at(dens, first, rule, sc.pts, hp.threads);
        const auto rhs = wolff_at(flat, first, rule, sc.pts, hp.threads);
        rep.refinement.push_back(upper_pass(rep, pass == 0, sc.pts, lhs, rhs));
    }
    rep.passed = rep.hypothesis_ok && !rep.divergent && rep.max_ratio < kInfinity;
    return rep;
}

// --------- boundary capacities ---------

InequalityReport boundary_capacity_equiv_check(const Box& base, double alpha, double s,
                                               double h, const SolveOptions& opts) {
    const int nb = base.dim();
    if (nb < 1 || nb > 2)
        throw ParameterError("boundary capacity needs a base box in 1 or 2 dimensions");
    if (!(s > 1.0)) throw ParameterError("boundary capacity needs s > 1");
    if (!(h > 0.0)) throw ParameterError("capacity grid spacing must be positive");
    const double sprime = s / (s - 1.0);
    const double order = alpha + 2.0 / sprime - 1.0;
    if (!(order > 0.0 && order < static_cast<double>(nb)))
        throw ParameterError("boundary capacity kernel order alpha + 2/s' - 1 must lie in (0, N-1)");

    CapacityParams left;
    left.kind = CapacityKind::weighted_halfspace;
    left.alpha = alpha;
    left.s = s;
    left.validate();
    CapacityParams right;
    right.kind = CapacityKind::riesz;
    right.alpha = order;
    right.s = s;

    Box lifted = base;
    lifted.lo.push_back(0.0);
    lifted.hi.push_back(0.0);

    InequalityReport rep;
    rep.check = "boundary-capacity";
    for (int pass = 0; pass < 2; ++pass) {
        const double hh = h / (1 << pass);
        // The base set must cover at least one cell center per axis; a
        // degenerate box stands for its containing cell at this resolution.
        Box rbox = base;
        for (int d = 0; d < nb; ++d) rbox.hi[d] = std::max(rbox.hi[d], rbox.lo[d] + hh);
        const double lhs = capacity_variational(left, Region::make_box(lifted), hh, opts).value;
        const double rhs = capacity_variational(right, Region::make_box(rbox), hh, opts).value;
        double ratio = 0.0;
        if (rhs > 0.0) ratio = lhs / rhs;
        else if (lhs > 0.0) ratio = kInfinity;
        rep.refinement.push_back(ratio);
        rep.lhs = lhs;
        rep.rhs = rhs;
        if (std::isfinite(ratio)) {
            rep.min_ratio = std::min(rep.min_ratio, ratio);
            rep.max_ratio = std::max(rep.max_ratio, ratio);
        } else {
            rep.divergent = true;
        }
    }
    rep.passed = !rep.divergent && rep.min_ratio > 0.0 &&
                 rep.max_ratio <= 2.0 * rep.min_ratio;
    return rep;
}

// --------- trace conditions ---------

namespace {

// Midpoint quadrature of int_B x_N (P[sigma])^{q2} dx over the ball B_t(c).
double tangent_ball_integral(const DiscreteMeasure& sigma, const Point& c, double t,
                             double h, double q2) {
    const int n = static_cast<int>(c.size());
    const int m = std::max(2, static_cast<int>(std::llround(2.0 * t / h)));
    const double step = 2.0 * t / m;
    const double cv = std::pow(step, n);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    Point x(static_cast<std::size_t>(n));
    double total = 0.0;
    while (true) {
        double d2 = 0.0;
        for (int d = 0; d < n; ++d) {
            x[static_cast<std::size_t>(d)] =
                c[static_cast<std::size_t>(d)] - t +
                (idx[static_cast<std::size_t>(d)] + 0.5) * step;
            const double diff = x[static_cast<std::size_t>(d)] - c[static_cast<std::size_t>(d)];
            d2 += diff * diff;
        }
        if (d2 <= t * t && x.back() > 0.0)
            total += x.back() * std::pow(poisson_potential(sigma, x), q2) * cv;
        int d = n - 1;
        while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == m) {
            idx[static_cast<std::size_t>(d)] = 0;
            --d;
        }
        if (d < 0) break;
    }
    return total;
}

void finish_record(ConditionRecord& rec, ConditionReport& rep) {
    if (rec.capacity > 0.0) {
        rec.ratio = rec.mass / rec.capacity;
    } else if (rec.mass > 0.0) {
        rec.ratio = kInfinity;
        rep.mass_on_null_set = true;
    } else {
        rec.ratio = 0.0;
    }
    rep.max_ratio = std::max(rep.max_ratio, rec.ratio);
    rep.records.push_back(std::move(rec));
}

// Ratios grew monotonically by > 10x across three dyadic shrinks.
void flag_divergence(const std::vector<double>& ratios, ConditionReport& rep) {
    for (std::size_t k = 0; k + 3 < ratios.size(); ++k) {
        bool monotone = true;
        for (int t = 0; t < 3; ++t)
            if (!(ratios[k + t + 1] > ratios[k + t])) monotone = false;
        if (monotone && ratios[k] > 0.0 && std::isfinite(ratios[k]) &&
            ratios[k + 3] > 10.0 * ratios[k])
            rep.diverging = true;
    }
}

}  // namespace

ConditionReport trace_condition_check(const DiscreteMeasure& sigma1,
                                      const DiscreteMeasure& sigma2,
                                      const HalfspaceParams& hp) {
    if (sigma1.dim != sigma2.dim || sigma1.dim < 1 || sigma1.dim > 2)
        throw ParameterError("trace data must share a boundary dimension of 1 or 2");
    const int n = sigma1.dim + 1;
    const double limit = n / (n - 1.0);
    if (!(hp.q1 >= 1.0 && hp.q1 < limit))
        throw ParameterError("trace check needs q1 in [1, N/(N-1))");
    if (!(hp.q1 * hp.q2 > 1.0)) throw ParameterError("trace check needs q1*q2 > 1");
    if (hp.levels < 1) throw ParameterError("trace check needs at least one level");
    if (!(hp.base_radius > 0.0)) throw ParameterError("family base radius must be positive");
    if (!(hp.h > 0.0)) throw ParameterError("capacity grid spacing must be positive");

    const double sprime = hp.q1 * hp.q2 / (hp.q1 * hp.q2 - 1.0);
    CapacityParams interior_cap;
    interior_cap.kind = CapacityKind::weighted_halfspace;
    interior_cap.alpha = (hp.q1 + 2.0) / hp.q1;
    interior_cap.s = sprime;
    CapacityParams boundary_cap;
    boundary_cap.kind = CapacityKind::riesz;
    boundary_cap.alpha = 2.0 * (hp.q2 + 1.0) / (hp.q1 * hp.q2);
    boundary_cap.s = sprime;
    boundary_cap.validate();

    SolveOptions opts;
    opts.threads = hp.threads;

    ConditionReport rep;
    rep.threshold = hp.threshold;

    if (!sigma1.empty()) {
        if (!(interior_cap.alpha < static_cast<double>(n)))
            throw ParameterError("interior trace condition needs (q1+2)/q1 below the dimension");
        interior_cap.validate();
        // Tangent balls B_t((z, t)) at support points z of sigma1.
        const auto anchors = dyadic_ball_family(sigma1, hp.base_radius, 1, hp.max_centers);
        for (const Region& a : anchors) {
            std::vector<double> ratios;
            for (int j = 0; j < hp.levels; ++j) {
                const double t = hp.base_radius * std::pow(2.0, -j);
                Point c = a.center;
                c.push_back(t);
                const double hr = hp.h * t / hp.base_radius;
                ConditionRecord rec;
                rec.center = c;
                rec.radius = t;
                rec.mass = tangent_ball_integral(sigma1, c, t, hr, hp.q2);
                rec.capacity =
                    capacity_variational(interior_cap, Region::make_ball(c, t), hr, opts).value;
                finish_record(rec, rep);
                ratios.push_back(rep.records.back().ratio);
            }
            flag_divergence(ratios, rep);
        }
    }

    if (!sigma2.empty()) {
        const auto family = dyadic_ball_family(sigma2, hp.base_radius, hp.levels, hp.max_centers);
        BallMassIndex index(sigma2);
        std::vector<double> ratios;
        Point current;
        for (const Region& e : family) {
            if (e.center != current && !ratios.empty()) {
                flag_divergence(ratios, rep);
                ratios.clear();
            }
            current = e.center;
            const double hr = hp.h * e.radius / hp.base_radius;
            ConditionRecord rec;
            rec.center = e.center;
            rec.radius = e.radius;
            rec.mass = index.ball_mass(e.center, e.radius);
            rec.capacity = capacity_variational(boundary_cap, e, hr, opts).value;
            finish_record(rec, rep);
            ratios.push_back(rep.records.back().ratio);
        }
        flag_divergence(ratios, rep);
    }

    if (rep.threshold)
        rep.passed = !rep.mass_on_null_set && rep.max_ratio <= *rep.threshold;
    else
        rep.passed = !rep.mass_on_null_set;
    return rep;
}

}  // namespace wolffkit
