#include <cmath>
#include <sstream>

#include "doctest.h"
#include "wolffkit/system.hpp"

using namespace wolffkit;

namespace {

SystemSpec laplace_spec(double p, double q1, double q2, int dim) {
    SystemSpec s;
    s.op = OperatorKind::p_laplace;
    s.p = p;
    s.q1 = q1;
    s.q2 = q2;
    s.dim = dim;
    return s;
}

SystemSpec hessian_spec(int k, double s1, double s2, int dim) {
    SystemSpec s;
    s.op = OperatorKind::k_hessian;
    s.k = k;
    s.q1 = s1;
    s.q2 = s2;
    s.dim = dim;
    return s;
}

SystemSpec dirac_system(double weight) {
    SystemSpec spec = laplace_spec(2.0, 2.0, 2.0, 3);
    spec.domain = Box::cube(3, -0.5, 0.5);
    spec.eta.dim = 3;
    spec.eta.add_atom(std::vector<double>{0.0, 0.0, 0.0}, weight);
    spec.eta.canonicalize();
    spec.mu.dim = 3;
    return spec;
}

Lattice small_lattice(const Box& box, int grid) {
    Lattice lat;
    lat.box = box;
    lat.shape.assign(3, grid);
    lat.shift = 0.25;
    return lat;
}

}  // namespace

TEST_SUITE("system") {

TEST_CASE("hessian parameterization") {
    auto p1 = hessian_params(1, 3);
    CHECK(p1.alpha == 1.0);
    CHECK(p1.beta == 2.0);
    auto p2 = hessian_params(2, 5);
    CHECK(p2.alpha == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(p2.beta == 3.0);
    auto p3 = hessian_params(3, 7);
    CHECK(p3.alpha == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(p3.beta == 4.0);
    CHECK_THROWS_AS(hessian_params(0, 3), ParameterError);
}

TEST_CASE("liouville regions match direct arithmetic") {
    const double ps[] = {2.0, 3.0};
    const double qs[] = {1.5, 2.0, 3.0, 10.0};
    const int dims[] = {3, 5, 7};
    for (double p : ps)
        for (double q1 : qs)
            for (double q2 : qs)
                for (int n : dims) {
                    auto spec = laplace_spec(p, q1, q2, n);
                    const double base = p - 1.0;
                    const double prod = q1 * q2;
                    if (prod <= base * base) {
                        CHECK_THROWS_AS(liouville_check(spec), ParameterError);
                        continue;
                    }
                    // distributed form, different rounding order
                    const double num = p * prod + p * base * std::max(q1, q2);
                    const double expect = num / (prod - base * base);
                    CHECK(liouville_check(spec) == (expect >= n));
                }

    // the first Hessian order reduces to the quadratic Laplace case
    for (double q1 : qs)
        for (double q2 : qs)
            for (int n : dims) {
                if (q1 * q2 <= 1.0) continue;
                CHECK(liouville_check(hessian_spec(1, q1, q2, n)) ==
                      liouville_check(laplace_spec(2.0, q1, q2, n)));
            }

    CHECK(liouville_check(laplace_spec(2.0, 3.0, 3.0, 3)));        // 2*12/8 = 3 >= 3
    CHECK(!liouville_check(laplace_spec(2.0, 10.0, 10.0, 3)));     // 220/99 < 3
    CHECK(liouville_check(hessian_spec(1, 3.0, 3.0, 3)));
}

TEST_CASE("subcritical thresholds") {
    CHECK(subcritical_check(laplace_spec(2.0, 2.0, 2.0, 3)));
    CHECK(!subcritical_check(laplace_spec(2.0, 3.0, 2.0, 3)));  // boundary is excluded
    CHECK(subcritical_check(laplace_spec(2.0, 2.999, 2.0, 3)));

    auto h = hessian_spec(1, 2.9, 2.0, 3);
    CHECK(subcritical_check(h));
    h.q1 = 3.0;
    CHECK(!subcritical_check(h));
    h.q1 = 0.5;  // below the operator order: only admissible on the whole space
    CHECK(!subcritical_check(h));
    h.whole_space = true;
    CHECK(subcritical_check(h));

    CHECK_THROWS_AS(subcritical_check(laplace_spec(3.0, 2.0, 2.0, 3)), ParameterError);
    CHECK_THROWS_AS(subcritical_check(hessian_spec(1, 2.0, 2.0, 2)), ParameterError);
}

TEST_CASE("iteration constants follow the exponents") {
    auto spec = laplace_spec(2.0, 2.0, 2.0, 3);
    auto c = IterationConstants::compute(spec);
    CHECK(c.c68 == 2.0);
    CHECK(c.c69 == 36.0);   // 4 * (4*2 + 1)
    CHECK(c.c70 == 2592.0);  // 2 * 36^2
    const double lead = 2.0 * (2592.0 * 2592.0 * 2.0);
    CHECK(c.m_star == doctest::Approx(std::pow(36.0 / (2.0 * lead), 0.25)).epsilon(1e-14));

    spec.c_star = 2.0;
    auto c2 = IterationConstants::compute(spec);
    CHECK(c2.c68 == 4.0);

    auto hs = hessian_spec(2, 5.0, 4.5, 7);  // beta = 3
    auto ch = IterationConstants::compute(hs);
    const double c68 = std::pow(2.0, 0.5);
    const double c69 = std::pow(2.0, 1.5) *
                       std::sqrt(std::pow(c68, 4.5) * std::pow(2.0, 3.5) + 1.0);
    CHECK(ch.c68 == doctest::Approx(c68).epsilon(1e-14));
    CHECK(ch.c69 == doctest::Approx(c69).epsilon(1e-14));
    CHECK(ch.c70 == doctest::Approx(std::sqrt(2.0) * std::pow(c69, 2.5)).epsilon(1e-14));
}

TEST_CASE("zero data keeps every iterate at zero") {
    SystemSpec spec = laplace_spec(2.0, 2.0, 2.0, 3);
    spec.domain = Box::cube(3, -1.0, 1.0);
    spec.mu.dim = 3;
    spec.eta.dim = 3;
    Lattice lat = small_lattice(spec.domain, 9);
    IterateOptions opts;
    opts.rule.nodes = 64;
    auto run = picard_iterate(spec, lat, opts);
    CHECK(run.converged);
    CHECK(!run.diverged);
    CHECK(run.states.size() == 2);  // zero start plus one confirming step
    for (const auto& st : run.states) {
        for (double v : st.u.values) CHECK(v == 0.0);
        for (double v : st.v.values) CHECK(v == 0.0);
        CHECK(st.bound_margin == 0.0);
    }
    CHECK(run.residual_u == 0.0);
    CHECK(run.residual_v == 0.0);

    auto rep = solution_bounds(spec, lat, run.last(), opts);
    CHECK(rep.passed);  // 0/0 rows are vacuous
    CHECK(rep.u_ratio == 0.0);
}

TEST_CASE("picard converges on small data") {
    SystemSpec spec = dirac_system(1e-3);
    Lattice lat = small_lattice(spec.domain, 17);
    IterateOptions opts;
    opts.rule.nodes = 128;
    auto run = picard_iterate(spec, lat, opts);
    REQUIRE(run.converged);
    CHECK(!run.diverged);
    CHECK(run.states.size() <= 51);
    for (const auto& st : run.states) {
        CHECK(st.monotone);
        CHECK(st.bound_ok);
    }
    CHECK(run.last().increment < 1e-6);
    CHECK(run.residual_u < 1e-3);
    CHECK(run.residual_v < 1e-3);
    CHECK(run.last().sup_v > 0.0);

    auto rep = solution_bounds(spec, lat, run.last(), opts);
    CHECK(rep.passed);
    CHECK(rep.u_ratio <= 1.0);
    CHECK(rep.v_ratio <= 1.0);
    CHECK(rep.v_ratio > 0.0);

    // shrinking the constants below the observed margin must flip the verdict
    auto bad = solution_bounds(spec, lat, run.last(), opts, 0.5 * rep.v_ratio);
    CHECK(!bad.passed);
    CHECK(bad.v_ratio > 1.0);
}

TEST_CASE("picard detects runaway data") {
    SystemSpec spec = dirac_system(1e6);
    Lattice lat = small_lattice(spec.domain, 17);
    IterateOptions opts;
    opts.rule.nodes = 128;
    auto run = picard_iterate(spec, lat, opts);
    CHECK(run.diverged);
    CHECK(!run.converged);
    CHECK(run.states.size() <= 51);
}

TEST_CASE("explicit majorant of the point-mass potential") {
    const Point x0{0.1, -0.2, 0.3};
    CHECK(corollary_d_majorant(1.0, x0, 2.0, 3, 0.5, Point{0.7, -0.2, 0.3}) == 0.0);
    CHECK(corollary_d_majorant(1.0, x0, 2.0, 3, kInfinity, Point{0.1, -0.2, 0.8}) ==
          doctest::Approx(2.0).epsilon(1e-14));  // 1/|x-x0|

    // a enters through a^{1/(p-1)}
    const Point x{0.3, 0.1, 0.0};
    const double base = corollary_d_majorant(2.0, x0, 2.5, 3, 2.0, x);
    const double quad = corollary_d_majorant(2.0 * std::pow(2.0, 1.5), x0, 2.5, 3, 2.0, x);
    CHECK(quad == doctest::Approx(2.0 * base).epsilon(1e-12));

    // for p = 2 the radial quadrature reproduces the formula
    DiscreteMeasure m;
    m.dim = 3;
    m.add_atom(x0, 0.7);
    m.canonicalize();
    PotentialParams pp;
    pp.dim = 3;
    pp.trunc = Truncation::fixed(2.0);
    QuadratureRule rule;
    const Point probe{0.6, 0.2, -0.1};
    const double w = wolff(m, pp, rule, probe);
    const double maj = corollary_d_majorant(0.7, x0, 2.0, 3, 2.0, probe);
    CHECK(w == doctest::Approx(maj).epsilon(1e-3));

    CHECK_THROWS_AS(corollary_d_majorant(1.0, x0, 3.5, 3, 1.0, x), ParameterError);
    CHECK_THROWS_AS(corollary_d_majorant(-1.0, x0, 2.0, 3, 1.0, x), ParameterError);
    CHECK_THROWS_AS(corollary_d_majorant(1.0, x0, 2.0, 3, 0.0, x), ParameterError);
}

TEST_CASE("run config round trip") {
    std::istringstream in(
        "# sample run\n"
        "operator = p-laplace\n"
        "p = 2\n"
        "q1 = 2\n"
        "q2 = 2.5\n"
        "dim = 3\n"
        "domain = box\n"
        "box_lo = -1 -1 -1\n"
        "box_hi = 1 1 1\n"
        "grid = 21\n"
        "shift = 0.25\n"
        "max_m = 40\n"
        "tol_conv = 1e-7\n"
        "mode = plain\n"
        "nodes = 256\n"
        "threads = 2\n"
        "c_star = 1.5\n"
        "eta = data/eta.msr\n");
    auto cfg = parse_run_config(in);
    CHECK(cfg.spec.p == 2.0);
    CHECK(cfg.spec.q2 == 2.5);
    CHECK(cfg.spec.c_star == 1.5);
    CHECK(!cfg.spec.whole_space);
    CHECK(cfg.spec.domain.lo[0] == -1.0);
    CHECK(cfg.spec.domain.hi[2] == 1.0);
    CHECK(cfg.grid == 21);
    CHECK(cfg.max_m == 40);
    CHECK(cfg.tol_conv == 1e-7);
    CHECK(!cfg.monotone_mode);
    CHECK(cfg.nodes == 256);
    CHECK(cfg.threads == 2);
    CHECK(cfg.eta_path == "data/eta.msr");
    auto lat = cfg.lattice();
    CHECK(lat.shape.size() == 3);
    CHECK(lat.shape[0] == 21);
    CHECK(lat.shift == 0.25);

    std::istringstream hessian("operator = k-hessian\nk = 2\ns1 = 5\ns2 = 6\ndim = 7\n");
    auto hcfg = parse_run_config(hessian);
    CHECK(hcfg.spec.op == OperatorKind::k_hessian);
    CHECK(hcfg.spec.k == 2);
    CHECK(hcfg.spec.q1 == 5.0);

    std::istringstream bad_key("speed = 11\n");
    CHECK_THROWS_AS(parse_run_config(bad_key), ParameterError);
    std::istringstream bad_val("grid = many\n");
    CHECK_THROWS_AS(parse_run_config(bad_val), ParameterError);
    std::istringstream half_box("box_lo = 0 0 0\n");
    CHECK_THROWS_AS(parse_run_config(half_box), ParameterError);
    std::istringstream no_eq("grid 11\n");
    CHECK_THROWS_AS(parse_run_config(no_eq), ParameterError);
}

TEST_CASE("iteration csv is deterministic") {
    SystemSpec spec = dirac_system(1e-3);
    Lattice lat = small_lattice(spec.domain, 9);
    IterateOptions opts;
    opts.rule.nodes = 64;
    auto run = picard_iterate(spec, lat, opts);
    std::ostringstream a, b;
    run.write_csv(a);
    picard_iterate(spec, lat, opts).write_csv(b);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("m,sup_u,sup_v,increment,bound_margin") == 0);
    CHECK(a.str().find("# c68=") != std::string::npos);
    CHECK(a.str().find("# converged=1") != std::string::npos);
}

}  // TEST_SUITE
