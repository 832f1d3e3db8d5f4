#include "wolffkit/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>

#include "wolffkit/capacity.hpp"
#include "wolffkit/halfspace.hpp"
#include "wolffkit/inequality.hpp"
#include "wolffkit/measure.hpp"
#include "wolffkit/potential.hpp"
#include "wolffkit/system.hpp"

namespace wolffkit {

namespace {

// --------- plumbing ---------

std::string strf(const char* fmt, ...) {
    char buf[256];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

template <typename Fn>
CriterionResult run_one(int id, const char* name, double limit, double budget, Fn&& body) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    r.limit = limit;
    r.budget = budget;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = strf("unexpected error: %s", e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.budget > 0.0 && r.seconds > r.budget) {
        r.passed = false;
        r.detail += "; over time budget";
    }
    return r;
}

DiscreteMeasure origin_dirac(double weight) {
    DiscreteMeasure m;
    m.dim = 3;
    m.add_atom(std::vector<double>{0.0, 0.0, 0.0}, weight);
    m.canonicalize();
    return m;
}

SystemSpec dirac_box_system(double weight) {
    SystemSpec spec;
    spec.op = OperatorKind::p_laplace;
    spec.p = 2.0;
    spec.q1 = 2.0;
    spec.q2 = 2.0;
    spec.dim = 3;
    spec.domain = Box::cube(3, -0.5, 0.5);
    spec.mu.dim = 3;
    spec.eta = origin_dirac(weight);
    return spec;
}

Lattice offset_lattice(const Box& box, int grid) {
    Lattice lat;
    lat.box = box;
    lat.shape.assign(3, grid);
    lat.shift = 0.25;
    return lat;
}

// --------- closed forms and scaling laws ---------

void dirac_closed_form(CriterionResult& r) {
    const DiscreteMeasure dirac = origin_dirac(1.0);
    PotentialParams p;
    p.dim = 3;
    p.alpha = 1.0;
    p.beta = 2.0;
    QuadratureRule q;
    q.nodes = 512;
    double worst = 0.0;
    for (double d : {0.5, 1.0, 2.0, 4.0}) {
        const double v = wolff(dirac, p, q, Point{d, 0.0, 0.0});
        worst = std::max(worst, std::abs(v - 1.0 / d) * d);
    }
    r.observed = worst;
    r.passed = worst <= r.limit;
    r.detail = "point-mass potential vs 1/|x| at |x| in {0.5 1 2 4}; 512 nodes";
}

void homogeneity(CriterionResult& r) {
    PotentialParams p;
    p.dim = 3;
    p.alpha = 0.9;
    p.beta = 2.5;
    QuadratureRule q;
    q.nodes = 256;
    const double expo = 1.0 / (p.beta - 1.0);
    const std::vector<Point> probes = {{1.3, 0.2, 0.4},
                                       {-0.3, 0.55, 0.2},
                                       {0.5, 0.5, 1.45},
                                       {0.21, -0.4, -0.35}};
    double worst = 0.0;
    for (int j = 0; j < 10; ++j) {
        DiscreteMeasure m = random_atom_measure(3, 5, 200 + j);
        if (j % 3 == 0) {
            GridDensity g;
            g.origin = {0.0, 0.0, 0.0};
            g.spacing = 0.25;
            g.shape = {4, 4, 4};
            g.values.resize(64);
            Rng rng(300 + j);
            for (double& v : g.values) v = rng.uniform(0.0, 1.0);
            m.density = g;
        }
        std::vector<double> base(probes.size());
        for (std::size_t i = 0; i < probes.size(); ++i) base[i] = wolff(m, p, q, probes[i]);
        for (double lam : {0.5, 2.0, 4.0}) {
            const DiscreteMeasure ml = scale_measure(m, lam);
            const double factor = std::pow(lam, expo);
            for (std::size_t i = 0; i < probes.size(); ++i) {
                const double want = factor * base[i];
                const double got = wolff(ml, p, q, probes[i]);
                worst = std::max(worst, std::abs(got - want) / want);
            }
        }
    }
    r.observed = worst;
    r.passed = worst <= r.limit;
    r.detail = "scaling exponent 1/(beta-1) over 10 seeded measures x lambda in {0.5 2 4}";
}

void truncation_window(CriterionResult& r) {
    const DiscreteMeasure dirac = origin_dirac(1.0);
    PotentialParams p;
    p.dim = 3;
    p.alpha = 1.0;
    p.beta = 2.0;
    p.trunc = Truncation::fixed(1.0);
    QuadratureRule q;
    q.nodes = 512;
    const double v = wolff(dirac, p, q, Point{2.0, 0.0, 0.0});
    r.observed = v;
    r.passed = v == 0.0;
    r.detail = "R=1 potential of a point mass evaluated at distance 2";
}

// --------- composition comparisons ---------

ComposeParams suite_compose_params(int threads, std::uint64_t seed) {
    ComposeParams cp;
    cp.alpha = 1.0;
    cp.beta = 2.0;
    cp.q = 1.0;
    cp.grid = 25;
    cp.nodes = 256;
    cp.samples = 6;
    cp.seed = seed;
    cp.threads = threads;
    return cp;
}

void compose_lower(CriterionResult& r, int threads) {
    double worst_drift = 1.0;
    double global_min = kInfinity;
    bool ok = true;
    for (int j = 0; j < 25; ++j) {
        const DiscreteMeasure m = random_atom_measure(3, 5, 1000 + j);
        const InequalityReport rep = compose_lower_check(m, suite_compose_params(threads, 40 + j));
        ok = ok && rep.passed;
        global_min = std::min(global_min, rep.min_ratio);
        const double drift = rep.refinement[1] / rep.refinement[0];
        worst_drift = std::max(worst_drift, std::max(drift, 1.0 / drift));
    }
    r.observed = worst_drift;
    r.passed = ok && global_min > 0.0 && worst_drift < r.limit;
    r.detail = strf("25 seeded 5-atom measures; min ratio %.6g; worst refinement drift %.6g",
                    global_min, worst_drift);
}

void compose_upper(CriterionResult& r, int threads) {
    double worst_drift = 1.0;
    double global_max = 0.0;
    bool ok = true;
    for (int j = 0; j < 25; ++j) {
        const DiscreteMeasure m = random_atom_measure(3, 5, 1000 + j);
        const InequalityReport rep = compose_upper_check(m, suite_compose_params(threads, 60 + j));
        ok = ok && rep.passed;
        global_max = std::max(global_max, rep.max_ratio);
        const double drift = rep.refinement[1] / rep.refinement[0];
        worst_drift = std::max(worst_drift, std::max(drift, 1.0 / drift));
    }
    bool rejected = false;
    try {
        ComposeParams cp = suite_compose_params(threads, 60);
        cp.q = 3.0;  // the critical exponent N(beta-1)/(N-alpha*beta)
        compose_upper_check(random_atom_measure(3, 5, 1000), cp);
    } catch (const ParameterError&) {
        rejected = true;
    }
    r.observed = worst_drift;
    r.passed = ok && std::isfinite(global_max) && global_max > 0.0 && worst_drift < r.limit &&
               rejected;
    r.detail = strf("max ratio %.6g; worst refinement drift %.6g; critical q=3 rejected: %s",
                    global_max, worst_drift, rejected ? "yes" : "no");
}

// --------- capacity comparisons ---------

void ball_scaling(CriterionResult& r, int threads) {
    CapacityParams cp;
    cp.alpha = 1.0;
    cp.s = 2.0;
    SolveOptions so;
    so.threads = threads;
    const double radii[3] = {0.5, 1.0, 2.0};
    double logs[3];
    for (int i = 0; i < 3; ++i) {
        const Region ball = Region::make_ball({0.0, 0.0, 0.0}, radii[i]);
        logs[i] = std::log(capacity_variational(cp, ball, 1.0 / 32.0, so).value);
    }
    const double slope = (logs[2] - logs[0]) / std::log(4.0);
    r.observed = std::abs(slope - 1.0);
    r.passed = r.observed <= r.limit;
    r.detail = strf("log-log slope %.6f over rho in {1/2 1 2} at resolution 1/32", slope);
}

void boundary_capacity(CriterionResult& r, int threads) {
    Box base;
    base.lo = {0.0, 0.0};
    base.hi = {1.0, 1.0};
    SolveOptions so;
    so.threads = threads;
    const InequalityReport rep = boundary_capacity_equiv_check(base, 1.0, 2.0, 1.0 / 16.0, so);
    const double drift = rep.refinement[1] / rep.refinement[0];
    r.observed = std::max(drift, 1.0 / drift);
    r.passed = rep.passed && r.observed < r.limit;
    r.detail = strf("flat-set capacity ratios %.6g -> %.6g across one refinement",
                    rep.refinement[0], rep.refinement[1]);
}

// --------- exponent tables ---------

void liouville_tables(CriterionResult& r) {
    const double exps[4] = {1.5, 2.0, 3.0, 10.0};
    int mismatches = 0;
    int points = 0;
    for (double p : {2.0, 3.0}) {
        for (double q1 : exps) {
            for (double q2 : exps) {
                for (int n : {3, 5, 7}) {
                    SystemSpec s;
                    s.op = OperatorKind::p_laplace;
                    s.p = p;
                    s.q1 = q1;
                    s.q2 = q2;
                    s.dim = n;
                    const double base = p - 1.0;
                    const double prod = q1 * q2;
                    ++points;
                    if (!(prod > base * base)) {
                        try {
                            liouville_check(s);
                            ++mismatches;  // the degenerate pair must be rejected
                        } catch (const ParameterError&) {
                        }
                        continue;
                    }
                    const bool lib = liouville_check(s);
                    // cross-multiplied form, no division
                    const bool want =
                        p * (prod + base * std::max(q1, q2)) >= n * (prod - base * base);
                    if (lib != want) ++mismatches;
                    if (p == 2.0) {
                        SystemSpec h;
                        h.op = OperatorKind::k_hessian;
                        h.k = 1;
                        h.q1 = q1;
                        h.q2 = q2;
                        h.dim = n;
                        if (liouville_check(h) != lib) ++mismatches;
                    }
                }
            }
        }
    }
    r.observed = mismatches;
    r.passed = mismatches == 0;
    r.detail = strf("%d grid points vs cross-multiplied arithmetic; k=1 Hessian vs p=2 on 48",
                    points);
}

// --------- solver dichotomy ---------

void picard_dichotomy(CriterionResult& r, int threads) {
    const Lattice lat = offset_lattice(Box::cube(3, -0.5, 0.5), 33);
    IterateOptions io;
    io.rule.nodes = 512;
    io.threads = threads;

    const SystemSpec small = dirac_box_system(1e-3);
    const IterationRun run = picard_iterate(small, lat, io);
    bool shape_ok = true;
    for (const IterationState& st : run.states) shape_ok = shape_ok && st.monotone && st.bound_ok;
    const BoundReport bounds = solution_bounds(small, lat, run.last(), io);
    const double residual = std::max(run.residual_u, run.residual_v);
    const bool small_ok = run.converged && !run.diverged && run.states.size() <= 51 &&
                          run.last().increment < 1e-6 && residual < 1e-3 && shape_ok &&
                          bounds.passed;

    const SystemSpec big = dirac_box_system(1e6);
    const IterationRun blow = picard_iterate(big, lat, io);
    const bool big_ok = blow.diverged && !blow.converged && blow.states.size() <= 51;

    r.observed = residual;
    r.passed = small_ok && big_ok;
    r.detail = strf("a=1e-3 converged in %zu steps within bounds; a=1e6 diverged in %zu",
                    run.states.size() - 1, blow.states.size() - 1);
}

void zero_fixed_point(CriterionResult& r, int threads) {
    SystemSpec spec;
    spec.op = OperatorKind::p_laplace;
    spec.p = 2.0;
    spec.q1 = 2.0;
    spec.q2 = 2.0;
    spec.dim = 3;
    spec.domain = Box::cube(3, -0.5, 0.5);
    spec.mu.dim = 3;
    spec.eta.dim = 3;
    const Lattice lat = offset_lattice(spec.domain, 17);
    IterateOptions io;
    io.rule.nodes = 64;
    io.threads = threads;
    const IterationRun run = picard_iterate(spec, lat, io);
    double sup = 0.0;
    for (const IterationState& st : run.states) {
        for (double v : st.u.values) sup = std::max(sup, std::abs(v));
        for (double v : st.v.values) sup = std::max(sup, std::abs(v));
    }
    r.observed = sup;
    r.passed = sup == 0.0 && run.converged && run.residual_u == 0.0 && run.residual_v == 0.0;
    r.detail = strf("%zu iterates on the 17^3 lattice stay at zero", run.states.size());
}

// --------- maximal function ---------

void maximal_exactness(CriterionResult& r) {
    const DiscreteMeasure om = random_atom_measure(3, 30, 77);
    Rng rng(78);
    const auto one = [](std::span<const double>) { return 1.0; };
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Point x = {rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5)};
        worst = std::max(worst, std::abs(maximal_function(om, one, x) - 1.0));
    }

    Box window;
    window.lo = {0.15, 0.1, 0.2};
    window.hi = {0.8, 0.9, 0.7};
    const Region reg = Region::make_box(window);
    const auto indicator = [&](std::span<const double> y) { return reg.contains(y) ? 1.0 : 0.0; };
    int mismatches = 0;
    for (int i = 0; i < 25; ++i) {
        const Point x = {rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5)};
        const double lib = maximal_function(om, indicator, x);
        // exhaustive sweep over support radii, sums in canonical atom order
        std::vector<double> d2(om.atom_count());
        for (std::size_t j = 0; j < om.atom_count(); ++j) {
            double s = 0.0;
            const auto y = om.atom(j);
            for (std::size_t k = 0; k < y.size(); ++k) s += (y[k] - x[k]) * (y[k] - x[k]);
            d2[j] = s;
        }
        double best = 0.0;
        for (double r2 : d2) {
            double num = 0.0, den = 0.0;
            for (std::size_t j = 0; j < om.atom_count(); ++j) {
                if (d2[j] <= r2) {
                    num += om.atom_weights[j] * indicator(om.atom(j));
                    den += om.atom_weights[j];
                }
            }
            if (den > 0.0) best = std::max(best, num / den);
        }
        if (lib != best) ++mismatches;
    }
    r.observed = std::max(worst, static_cast<double>(mismatches));
    r.passed = worst == 0.0 && mismatches == 0;
    r.detail = "averages of 1 at 100 points; indicator vs exhaustive radius sweep at 25";
}

// --------- scalar integral probe ---------

void hardy_preset(CriterionResult& r) {
    const InequalityReport rep = hardy_check(HardyProbe{});
    const double dev = std::max(std::abs(rep.lhs - 0.5), std::abs(rep.rhs - 2.0));
    r.observed = dev;
    r.passed = dev <= r.limit && rep.passed && rep.lhs / rep.rhs <= rep.constant;
    r.detail = strf("lhs %.9g rhs %.9g against exact 0.5 and 2; constant %.6g", rep.lhs,
                    rep.rhs, rep.constant);
}

// --------- determinism ---------

std::string threaded_snapshot(int threads) {
    std::ostringstream out;

    const DiscreteMeasure m = random_atom_measure(3, 6, 55);
    PotentialParams p;
    p.dim = 3;
    p.alpha = 1.0;
    p.beta = 2.0;
    QuadratureRule q;
    q.nodes = 128;
    Lattice lat;
    lat.box = Box::cube(3, -1.5, 1.5);
    lat.shape = {17, 17, 17};
    out << "# field\n";
    wolff_field(m, p, q, lat, threads).write_csv(out);

    CapacityParams cp;
    cp.alpha = 1.0;
    cp.s = 2.0;
    SolveOptions so;
    so.threads = threads;
    const CapacityEstimate est =
        capacity_variational(cp, Region::make_box(Box::cube(3, 0.0, 1.0)), 0.125, so);
    out << "# capacity\n";
    out << strf("%.17g %d %d\n", est.value, est.iterations, est.converged ? 1 : 0);

    ComposeParams comp;
    comp.alpha = 1.0;
    comp.beta = 2.0;
    comp.q = 1.0;
    comp.grid = 17;
    comp.nodes = 64;
    comp.samples = 4;
    comp.seed = 13;
    comp.threads = threads;
    out << "# compose\n";
    compose_lower_check(m, comp).write_csv(out);

    SystemSpec spec = dirac_box_system(1e-3);
    IterateOptions io;
    io.rule.nodes = 64;
    io.threads = threads;
    out << "# iterate\n";
    picard_iterate(spec, offset_lattice(spec.domain, 9), io).write_csv(out);

    HalfspaceMeasure hm;
    hm.dim = 3;
    hm.boundary.dim = 2;
    hm.boundary.add_atom(std::vector<double>{0.0, 0.0}, 1.0);
    hm.boundary.canonicalize();
    hm.interior.dim = 3;
    HalfspaceParams hp;
    hp.q1 = 1.0;
    hp.q2 = 2.0;
    hp.grid = 17;
    hp.nodes = 64;
    hp.samples = 4;
    hp.threads = threads;
    out << "# halfspace\n";
    riesz_compose_check(hm, hp).write_csv(out);

    return out.str();
}

void determinism(CriterionResult& r) {
    const std::string a = threaded_snapshot(1);
    const std::string b = threaded_snapshot(8);
    r.observed = (a == b) ? 0.0 : 1.0;
    r.passed = !a.empty() && a == b;
    r.detail = strf("%zu output bytes from 5 threaded kernels at 1 vs 8 workers", a.size());
}

}  // namespace

bool SuiteReport::all_passed() const {
    if (results.empty()) return false;
    return std::all_of(results.begin(), results.end(),
                       [](const CriterionResult& r) { return r.passed; });
}

void SuiteReport::write_csv(std::ostream& out) const {
    out << "criterion,name,passed,observed,limit,detail\n";
    int npass = 0;
    for (const CriterionResult& r : results) {
        out << r.id << ',' << r.name << ',' << (r.passed ? 1 : 0) << ','
            << strf("%.10g", r.observed) << ',' << strf("%.10g", r.limit) << ',' << r.detail
            << '\n';
        if (r.passed) ++npass;
    }
    out << "# passed " << npass << "/" << results.size() << "\n";
}

SuiteReport run_acceptance_suite(const SuiteOptions& opts) {
    const int threads = opts.threads;
    SuiteReport rep;
    const auto add = [&](CriterionResult r) {
        if (opts.on_result) opts.on_result(r);
        rep.results.push_back(std::move(r));
    };
    add(run_one(1, "dirac-closed-form", 1e-3, 1.0,
                [](CriterionResult& r) { dirac_closed_form(r); }));
    add(run_one(2, "homogeneity", 1e-12, 5.0, [](CriterionResult& r) { homogeneity(r); }));
    add(run_one(3, "truncation-window", 0.0, 1.0,
                [](CriterionResult& r) { truncation_window(r); }));
    add(run_one(4, "compose-lower", 2.0, 60.0,
                [&](CriterionResult& r) { compose_lower(r, threads); }));
    add(run_one(5, "compose-upper", 2.0, 60.0,
                [&](CriterionResult& r) { compose_upper(r, threads); }));
    add(run_one(6, "ball-scaling", 0.05, 360.0,
                [&](CriterionResult& r) { ball_scaling(r, threads); }));
    add(run_one(7, "boundary-capacity", 2.0, 180.0,
                [&](CriterionResult& r) { boundary_capacity(r, threads); }));
    add(run_one(8, "liouville-tables", 0.0, 5.0,
                [](CriterionResult& r) { liouville_tables(r); }));
    add(run_one(9, "picard-dichotomy", 1e-3, 300.0,
                [&](CriterionResult& r) { picard_dichotomy(r, threads); }));
    add(run_one(10, "zero-fixed-point", 0.0, 30.0,
                [&](CriterionResult& r) { zero_fixed_point(r, threads); }));
    add(run_one(11, "maximal-function", 0.0, 5.0,
                [](CriterionResult& r) { maximal_exactness(r); }));
    add(run_one(12, "hardy-preset", 1e-6, 5.0, [](CriterionResult& r) { hardy_preset(r); }));
    add(run_one(13, "determinism", 0.0, 120.0, [](CriterionResult& r) { determinism(r); }));
    return rep;
}

}  // namespace wolffkit
