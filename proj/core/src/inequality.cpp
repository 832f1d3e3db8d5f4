#include "wolffkit/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "wolffkit/capacity.hpp"
#include "scene.hpp"

namespace wolffkit {

// --------- step functions ---------

double StepFunction::value(double r) const {
    auto it = std::lower_bound(breaks.begin(), breaks.end(), r);
    const std::size_t k = (it == breaks.begin())
                              ? 0
                              : static_cast<std::size_t>(it - breaks.begin()) - 1;
    return values[k];
}

void StepFunction::validate() const {
    if (breaks.empty() || breaks.size() != values.size())
        throw ParameterError("step function needs matching breaks and values");
    if (breaks.front() != 0.0)
        throw ParameterError("step function breaks must start at 0");
    for (std::size_t i = 1; i < breaks.size(); ++i)
        if (!(breaks[i] > breaks[i - 1]))
            throw ParameterError("step function breaks must be strictly increasing");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0))
            throw ParameterError("step function values must be nonnegative");
        if (i > 0 && values[i] < values[i - 1])
            throw ParameterError("step function must be nondecreasing");
    }
}

StepFunction StepFunction::constant(double c) {
    StepFunction f;
    f.breaks = {0.0};
    f.values = {c};
    return f;
}

// --------- hardy probe ---------

namespace {

// One h-constant piece of (0, R].  The inner integral restricted to the piece
// is a + b t^theta, or c - hval ln t when theta == 0.
struct Piece {
    double lo = 0.0, hi = 0.0;
    double hval = 0.0;
    double a = 0.0, b = 0.0, c = 0.0;
};

std::vector<double> cuts_below(const StepFunction& h, double top) {
    std::vector<double> cuts{0.0};
    for (double b : h.breaks)
        if (b > 0.0 && b < top) cuts.push_back(b);
    cuts.push_back(top);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

std::vector<Piece> build_pieces(const HardyProbe& p) {
    const auto cuts = cuts_below(p.h, p.R);
    std::vector<Piece> ps(cuts.size() - 1);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        ps[i].lo = cuts[i];
        ps[i].hi = cuts[i + 1];
        ps[i].hval = p.h.value(cuts[i + 1]);
    }
    // Accumulate the inner integral right to left so each piece carries exact
    // closed-form coefficients.
    double right = 0.0;  // inner integral evaluated at the piece's upper end
    for (std::size_t i = ps.size(); i-- > 0;) {
        Piece& pc = ps[i];
        if (p.theta != 0.0) {
            pc.b = -pc.hval / p.theta;
            pc.a = right + pc.hval * std::pow(pc.hi, p.theta) / p.theta;
            if (pc.lo > 0.0) right = pc.a + pc.b * std::pow(pc.lo, p.theta);
        } else {
            pc.c = right + pc.hval * std::log(pc.hi);
            if (pc.lo > 0.0) right = pc.c - pc.hval * std::log(pc.lo);
        }
    }
    return ps;
}

double piece_inner(const Piece& pc, double theta, double t) {
    const double g = (theta != 0.0) ? pc.a + pc.b * std::pow(t, theta)
                                    : pc.c - pc.hval * std::log(t);
    return g > 0.0 ? g : 0.0;  // clip roundoff at the vanishing endpoint
}

bool near_integer(double g, int& n) {
    const double r = std::round(g);
    if (!(std::abs(g - r) <= 1e-12) || r < 1.0 || r > 60.0) return false;
    n = static_cast<int>(r);
    return true;
}

// int_0^t u^{kappa-1} (ln u)^j du, zero limit at t = 0.
double log_power_primitive(double t, double kappa, int j) {
    if (t <= 0.0) return 0.0;
    const double lt = std::log(t);
    double coef = 1.0;  // j!/(j-i)!
    double kp = kappa;  // kappa^{i+1}
    double sign = 1.0;
    double sum = 0.0;
    for (int i = 0; i <= j; ++i) {
        sum += sign * coef * std::pow(lt, j - i) / kp;
        sign = -sign;
        coef *= static_cast<double>(j - i);
        kp *= kappa;
    }
    return std::pow(t, kappa) * sum;
}

// Exact outer integral over one piece for integer gamma = n via the binomial
// expansion of the inner closed form.
double exact_piece(const Piece& pc, double kappa, double theta, int n) {
    double total = 0.0;
    double choose = 1.0;
    for (int j = 0; j <= n; ++j) {
        if (theta != 0.0) {
            const double e = kappa + theta * static_cast<double>(j);
            const double upper = std::pow(pc.hi, e);
            const double lower = (pc.lo > 0.0) ? std::pow(pc.lo, e) : 0.0;
            total += choose * std::pow(pc.a, n - j) * std::pow(pc.b, j) *
                     (upper - lower) / e;
        } else {
            total += choose * std::pow(pc.c, n - j) * std::pow(-pc.hval, j) *
                     (log_power_primitive(pc.hi, kappa, j) -
                      log_power_primitive(pc.lo, kappa, j));
        }
        choose = choose * static_cast<double>(n - j) / static_cast<double>(j + 1);
    }
    return total;
}

// Log-space doubling trapezoid for non-integer gamma; the t = 0 endpoint gets
// a kappa-scaled cutoff plus a first-order tail estimate.
double trapezoid_piece(const Piece& pc, double kappa, double theta, double gamma) {
    double lo = pc.lo;
    double tail = 0.0;
    if (lo <= 0.0) {
        const double eps =
            std::clamp(std::exp(std::log(1e-14) / kappa), 1e-250, 0.25);
        lo = pc.hi * eps;
        tail = std::pow(lo, kappa) / kappa *
               std::pow(piece_inner(pc, theta, lo), gamma);
    }
    const double u0 = std::log(lo);
    const double u1 = std::log(pc.hi);
    auto f = [&](double u) {
        const double t = std::exp(u);
        return std::pow(t, kappa) * std::pow(piece_inner(pc, theta, t), gamma);
    };
    int n = 64;
    double T = 0.5 * (f(u0) + f(u1));
    const double h0 = (u1 - u0) / static_cast<double>(n);
    for (int i = 1; i < n; ++i) T += f(u0 + h0 * static_cast<double>(i));
    T *= h0;
    for (int round = 0; round < 10; ++round) {
        const double step = (u1 - u0) / (2.0 * static_cast<double>(n));
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            s += f(u0 + (2.0 * static_cast<double>(i) + 1.0) * step);
        const double T2 = 0.5 * T + step * s;
        const bool done = std::abs(T2 - T) <= 1e-10 * std::abs(T2) + 1e-300;
        T = T2;
        n *= 2;
        if (done) break;
    }
    return T + tail;
}

}  // namespace

InequalityReport hardy_check(const HardyProbe& probe) {
    probe.h.validate();
    if (!(probe.kappa > 0.0)) throw ParameterError("hardy: kappa must be positive");
    if (!(probe.gamma > 0.0)) throw ParameterError("hardy: gamma must be positive");
    if (!(probe.R > 0.0) || std::isinf(probe.R))
        throw ParameterError("hardy: R must be positive and finite");
    const double e2 = probe.kappa + probe.theta * probe.gamma;
    if (!(e2 > 0.0))
        throw ParameterError("hardy: kappa + theta*gamma must be positive");

    int n = 0;
    const bool exact = near_integer(probe.gamma, n);
    double lhs = 0.0;
    for (const Piece& pc : build_pieces(probe))
        lhs += exact ? exact_piece(pc, probe.kappa, probe.theta, n)
                     : trapezoid_piece(pc, probe.kappa, probe.theta, probe.gamma);

    // The comparison side is exact piecewise whatever gamma is.
    double rhs = 0.0;
    {
        const auto cuts = cuts_below(probe.h, 2.0 * probe.R);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double v = probe.h.value(cuts[i + 1]);
            if (v <= 0.0) continue;
            const double upper = std::pow(cuts[i + 1], e2);
            const double lower = (cuts[i] > 0.0) ? std::pow(cuts[i], e2) : 0.0;
            rhs += std::pow(v, probe.gamma) * (upper - lower) / e2;
        }
    }

    InequalityReport rep;
    rep.check = "hardy";
    rep.lhs = lhs;
    rep.rhs = rhs;
    double ratio = 0.0;
    if (rhs > 0.0) ratio = lhs / rhs;
    else if (lhs > 0.0) ratio = kInfinity;
    rep.min_ratio = ratio;
    rep.max_ratio = ratio;
    if (probe.gamma <= 1.0) {
        rep.constant =
            std::pow(2.0, probe.gamma / 4.0) *
            std::max(1.0, std::pow(2.0, -probe.gamma * probe.theta / 4.0)) /
            probe.kappa;
    } else if (probe.kappa > probe.gamma) {
        rep.constant = std::pow((probe.gamma - 1.0) / probe.gamma, probe.gamma - 1.0) /
                       (probe.kappa - probe.gamma);
    }
    // else: no constructive constant; the bound is vacuous at +inf.
    rep.divergent = !std::isfinite(lhs) || !std::isfinite(rhs);
    rep.passed = !rep.divergent && ratio <= rep.constant;
    return rep;
}

// --------- potential composition ---------

double composite_order(double alpha, double beta, double q) {
    if (!(alpha > 0.0) || !(beta > 1.0) || !(q > 0.0))
        throw ParameterError("composition needs alpha > 0, beta > 1, q > 0");
    return alpha * beta * (q + beta - 1.0) / q;
}

PotentialParams composite_params(int dim, double alpha, double beta, double q) {
    if (!(alpha > 0.0) || !(beta > 1.0) || !(q > 0.0))
        throw ParameterError("composition needs alpha > 0, beta > 1, q > 0");
    const double bm1 = beta - 1.0;
    PotentialParams p;
    p.dim = dim;
    p.alpha = alpha * beta * (q + bm1) / (q + bm1 * bm1);
    p.beta = bm1 * bm1 / q + 1.0;
    return p;
}

double subcritical_limit(int dim, double alpha, double beta) {
    const double n = static_cast<double>(dim);
    const double ab = alpha * beta;
    if (!(ab < n)) return kInfinity;
    return n * (beta - 1.0) / (n - ab);
}

namespace {

using detail::densified_power;
using detail::sample_points;
using detail::scene_cube;
using detail::scene_lattice;

struct ComposeSpec {
    const char* name = "";
    bool upper = false;  // aggregate max composed/composite instead of min
    PotentialParams comp;
    PotentialParams inner;
    PotentialParams outer;
    Box scene;
};

InequalityReport run_compose(const DiscreteMeasure& m, const ComposeParams& cp,
                             const ComposeSpec& spec) {
    if (cp.samples < 1) throw ParameterError("composition needs at least one sample");
    if (cp.grid < 2) throw ParameterError("composition grid must be at least 2");
    const auto pts = sample_points(spec.scene, cp.samples, cp.seed);

    InequalityReport rep;
    rep.check = spec.name;
    for (int pass = 0; pass < 2; ++pass) {
        QuadratureRule rule;
        rule.nodes = cp.nodes << pass;
        Lattice lat = scene_lattice(spec.scene, cp.grid);
        DiscreteMeasure dens = densified_power(m, spec.inner, rule, lat, cp.q, cp.threads);
        const auto composed = wolff_at(dens, spec.outer, rule, pts, cp.threads);
        const auto composite = wolff_at(m, spec.comp, rule, pts, cp.threads);
        double agg = spec.upper ? 0.0 : kInfinity;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double co = composite[i];
            const double cd = composed[i];
            double ratio = 0.0;
            if (co > 0.0) ratio = cd / co;
            else if (cd > 0.0) ratio = kInfinity;
            const bool finite = std::isfinite(co) && std::isfinite(cd);
            // A vanishing left side satisfies the bound vacuously (adapted
            // truncations zero both sides far from the support); such rows
            // stay out of the aggregates.
            const bool vacuous = (spec.upper ? cd : co) == 0.0;
            if (pass == 0) {
                SampleRow row;
                row.x = pts[i];
                row.lhs = spec.upper ? cd : co;
                row.rhs = spec.upper ? co : cd;
                row.ratio = ratio;
                rep.rows.push_back(std::move(row));
                if (!finite) {
                    rep.divergent = true;
                } else if (!vacuous) {
                    rep.min_ratio = std::min(rep.min_ratio, ratio);
                    rep.max_ratio = std::max(rep.max_ratio, ratio);
                }
            }
            if (finite && !vacuous)
                agg = spec.upper ? std::max(agg, ratio) : std::min(agg, ratio);
        }
        rep.refinement.push_back(agg);
    }
    rep.passed = !rep.divergent &&
                 (spec.upper ? rep.max_ratio < kInfinity : rep.min_ratio > 0.0);
    return rep;
}

PotentialParams base_params(int dim, const ComposeParams& cp, const Truncation& t) {
    PotentialParams p;
    p.dim = dim;
    p.alpha = cp.alpha;
    p.beta = cp.beta;
    p.trunc = t;
    return p;
}

}  // namespace

InequalityReport compose_lower_check(const DiscreteMeasure& m, const ComposeParams& cp) {
    ComposeSpec spec;
    spec.name = "compose-lower";
    spec.scene = scene_cube(m.support_box());
    const double R = cp.radius > 0.0 ? cp.radius : 2.0 * spec.scene.diameter();
    spec.comp = composite_params(m.dim, cp.alpha, cp.beta, cp.q);
    spec.comp.trunc = Truncation::fixed(0.5 * R);
    spec.inner = base_params(m.dim, cp, Truncation::fixed(R));
    spec.outer = spec.inner;
    return run_compose(m, cp, spec);
}

InequalityReport compose_upper_check(const DiscreteMeasure& m, const ComposeParams& cp) {
    if (!(cp.q < subcritical_limit(m.dim, cp.alpha, cp.beta)))
        throw ParameterError("reverse composition needs q strictly below the subcritical limit");
    ComposeSpec spec;
    spec.name = "compose-upper";
    spec.upper = true;
    spec.scene = scene_cube(m.support_box());
    const double R = cp.radius > 0.0 ? cp.radius : 2.0 * spec.scene.diameter();
    spec.comp = composite_params(m.dim, cp.alpha, cp.beta, cp.q);
    spec.comp.trunc = Truncation::fixed(4.0 * R);
    spec.inner = base_params(m.dim, cp, Truncation::fixed(R));
    spec.outer = spec.inner;
    return run_compose(m, cp, spec);
}

InequalityReport compose_adapted_check(const DiscreteMeasure& m, const ComposeParams& cp,
                                       const Box& domain, double delta) {
    if (domain.dim() != m.dim)
        throw ParameterError("adapted composition: domain dimension mismatch");
    ComposeSpec spec;
    spec.name = "compose-adapted";
    spec.scene = domain;
    spec.comp = composite_params(m.dim, cp.alpha, cp.beta, cp.q);
    spec.comp.trunc = Truncation::adapted(0.5 * delta, domain);
    spec.inner = base_params(m.dim, cp, Truncation::adapted(delta, domain));
    spec.outer = spec.inner;
    return run_compose(m, cp, spec);
}

// --------- combined capacitary check ---------

InequalityReport combination_check(const DiscreteMeasure& mu, const DiscreteMeasure& eta,
                                   const CombinationParams& cp) {
    if (!mu.empty() && !eta.empty() && mu.dim != eta.dim)
        throw ParameterError("combination: mu/eta dimension mismatch");
    if (mu.empty() && eta.empty()) {
        InequalityReport rep;
        rep.check = "combination-trivial";
        rep.min_ratio = 0.0;
        rep.max_ratio = 0.0;
        rep.passed = true;
        return rep;
    }
    const int dim = mu.empty() ? eta.dim : mu.dim;
    const double bm1 = cp.beta - 1.0;
    if (!(cp.s > 0.0)) throw ParameterError("combination: s must be positive");
    if (!(cp.q > 0.0) || !(cp.q < subcritical_limit(dim, cp.alpha, cp.beta)))
        throw ParameterError("combination: q must lie strictly below the subcritical limit");
    if (!(cp.q * cp.s > bm1 * bm1))
        throw ParameterError("combination: q*s must exceed (beta-1)^2");
    if (cp.samples < 1 || cp.grid < 2 || cp.levels < 1)
        throw ParameterError("combination: samples, grid and levels must be positive");

    const double Ac = composite_order(cp.alpha, cp.beta, cp.q);
    const double sc = cp.q * cp.s / (cp.q * cp.s - bm1 * bm1);

    const Box support = mu.empty()  ? eta.support_box()
                      : eta.empty() ? mu.support_box()
                                    : Box::hull(mu.support_box(), eta.support_box());
    const Box cube = scene_cube(support);
    Lattice lat = scene_lattice(cube, cp.grid);
    QuadratureRule rule;
    rule.nodes = cp.nodes;
    PotentialParams base;
    base.dim = dim;
    base.alpha = cp.alpha;
    base.beta = cp.beta;
    if (cp.radius > 0.0) base.trunc = Truncation::fixed(cp.radius);

    // omega = (W[mu])^s dx + eta
    DiscreteMeasure omega;
    omega.dim = dim;
    if (!mu.empty()) omega = densified_power(mu, base, rule, lat, cp.s, cp.threads);
    for (std::size_t i = 0; i < eta.atom_count(); ++i)
        omega.add_atom(eta.atom(i), eta.atom_weights[i]);
    if (eta.density) {
        if (!omega.density) {
            omega.density = eta.density;
        } else {
            GridDensity& g = *omega.density;
            const GridDensity& e = *eta.density;
            if (g.origin != e.origin || g.spacing != e.spacing || g.shape != e.shape)
                throw DataError("combination: eta density must live on the sample grid");
            for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] += e.values[i];
        }
    }
    omega.canonicalize();

    InequalityReport rep;
    const double Acs = Ac * sc;
    const auto family = dyadic_ball_family(omega, 0.5 * cube.diameter(), cp.levels);
    if (Acs < static_cast<double>(dim)) {
        rep.check = "combination-capacity";
        CapacityParams capp;
        capp.alpha = Ac;
        capp.s = sc;
        const ConditionReport cr = condition_check(omega, capp, family, cp.threshold, cp.h);
        rep.hypothesis_ok = cr.passed;
    } else {
        // Beyond the critical product the capacity of every compact vanishes;
        // gate on the scaling form omega(B_rho) <= threshold * rho^{N - A s}.
        rep.check = "combination-growth";
        const BallMassIndex index(omega);
        bool ok = true;
        for (const Region& r : family) {
            const double mass = index.ball_mass(r.center, r.radius);
            if (mass > cp.threshold * std::pow(r.radius, static_cast<double>(dim) - Acs))
                ok = false;
        }
        rep.hypothesis_ok = ok;
    }

    DiscreteMeasure inner = densified_power(omega, base, rule, lat, cp.q, cp.threads);
    DiscreteMeasure outer = densified_power(inner, base, rule, lat, cp.s, cp.threads);
    const auto pts = sample_points(cube, cp.samples, cp.seed);
    const auto lhs = wolff_at(outer, base, rule, pts, cp.threads);
    const auto rhs = wolff_at(omega, base, rule, pts, cp.threads);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        SampleRow row;
        row.x = pts[i];
        row.lhs = lhs[i];
        row.rhs = rhs[i];
        if (row.rhs > 0.0) row.ratio = row.lhs / row.rhs;
        else if (row.lhs > 0.0) row.ratio = kInfinity;
        const bool finite = std::isfinite(row.lhs) && std::isfinite(row.rhs);
        if (!finite) {
            rep.divergent = true;
        } else if (row.lhs != 0.0) {  // zero left side holds vacuously
            rep.min_ratio = std::min(rep.min_ratio, row.ratio);
            rep.max_ratio = std::max(rep.max_ratio, row.ratio);
        }
        rep.rows.push_back(std::move(row));
    }
    rep.passed = rep.hypothesis_ok && !rep.divergent && rep.max_ratio < kInfinity;
    return rep;
}

// --------- report output ---------

void InequalityReport::write_csv(std::ostream& out) const {
    const std::size_t dim = rows.empty() ? 0 : rows.front().x.size();
    std::vector<std::string> cells;
    for (std::size_t d = 0; d < dim; ++d) cells.push_back("x" + std::to_string(d + 1));
    cells.push_back("lhs");
    cells.push_back("rhs");
    cells.push_back("ratio");
    out << join_csv(cells) << "\n";
    for (const SampleRow& r : rows) {
        cells.clear();
        for (double c : r.x) cells.push_back(format_num(c));
        cells.push_back(format_num(r.lhs));
        cells.push_back(format_num(r.rhs));
        cells.push_back(format_num(r.ratio));
        out << join_csv(cells) << "\n";
    }
    out << "# check=" << check << "\n";
    out << "# lhs=" << format_num(lhs) << " rhs=" << format_num(rhs) << "\n";
    out << "# min_ratio=" << format_num(min_ratio)
        << " max_ratio=" << format_num(max_ratio)
        << " constant=" << format_num(constant) << "\n";
    if (!refinement.empty()) {
        out << "# refinement=";
        for (std::size_t i = 0; i < refinement.size(); ++i)
            out << (i ? ";" : "") << format_num(refinement[i]);
        out << "\n";
    }
    out << "# hypothesis_ok=" << (hypothesis_ok ? 1 : 0)
        << " divergent=" << (divergent ? 1 : 0) << " passed=" << (passed ? 1 : 0)
        << "\n";
}

// --------- sample data ---------

DiscreteMeasure random_atom_measure(int dim, int count, std::uint64_t seed) {
    if (dim < 1 || count < 1)
        throw ParameterError("random measure needs dim >= 1 and count >= 1");
    Rng rng(seed);
    DiscreteMeasure m;
    m.dim = dim;
    Point x(static_cast<std::size_t>(dim));
    for (int i = 0; i < count; ++i) {
        for (int d = 0; d < dim; ++d) x[d] = rng.uniform01();
        m.add_atom(x, rng.uniform(0.1, 1.0));
    }
    m.canonicalize();
    return m;
}

}  // namespace wolffkit
