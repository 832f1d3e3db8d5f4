#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wolffkit/capacity.hpp"

using namespace wolffkit;

namespace {

// The whole test binary shares one scratch cache file, installed before main
// so no capacity call can latch onto a stale location.
const bool cache_env_ready = [] {
    std::remove("/tmp/wolffkit_test_cache.txt");
    setenv("WOLFFKIT_CACHE", "/tmp/wolffkit_test_cache.txt", 1);
    return true;
}();

DiscreteMeasure point_mass(std::vector<double> x, double w) {
    DiscreteMeasure m;
    m.dim = static_cast<int>(x.size());
    m.add_atom(x, w);
    m.canonicalize();
    return m;
}

}  // namespace

TEST_SUITE("capacity") {

TEST_CASE("cache file is consulted and extended") {
    REQUIRE(cache_env_ready);
    CHECK(capacity_cache_path() == "/tmp/wolffkit_test_cache.txt");
    {
        // Planted reference: kernel order 1, s = 2, h = 1/16.
        std::ofstream out(capacity_cache_path());
        out << "3 1 2 0.0625 0.125 2000 1\n";
    }
    CapacityParams p;
    p.alpha = 1.0;
    p.s = 2.0;
    CapacityEstimate e = capacity_ball(p, 2.0, 3, 0.0625);
    CHECK(e.method == CapacityMethod::ball_scaling);
    REQUIRE(e.reference.has_value());
    CHECK(*e.reference == 0.125);           // came from the planted line
    CHECK(e.value == 2.0 * 0.125);          // rho^{N-As} = 2

    // A different key triggers a solve and an appended line.
    CapacityParams q = p;
    q.s = 1.5;
    CapacityEstimate fresh = capacity_ball(q, 1.0, 3, 0.0625);
    CHECK(fresh.value > 0.0);
    std::ifstream in(capacity_cache_path());
    int lines = 0;
    std::string line;
    bool found = false;
    while (std::getline(in, line)) {
        ++lines;
        std::istringstream ls(line);
        int n, iters, conv;
        double a, s, h, v;
        REQUIRE((ls >> n >> a >> s >> h >> v >> iters >> conv));
        if (n == 3 && s == 1.5) {
            CHECK(v == *fresh.reference);
            found = true;
        }
    }
    CHECK(lines == 2);
    CHECK(found);
}

TEST_CASE("null and point criteria follow the kernel order") {
    CapacityParams p;
    p.s = 2.0;
    p.alpha = 3.0;
    CHECK(capacity_zero_test(p, 3));  // boundary case included
    p.alpha = 3.5;
    CHECK(capacity_zero_test(p, 3));
    p.alpha = 1.5;
    CHECK_FALSE(capacity_zero_test(p, 3));

    CapacityParams b;
    b.kind = CapacityKind::bessel;
    b.alpha = 3.0;
    CHECK_FALSE(point_capacity_positive(b, 3));  // strict inequality
    b.alpha = 3.5;
    CHECK(point_capacity_positive(b, 3));
    b.alpha = 2.0;
    CHECK_FALSE(point_capacity_positive(b, 3));
    CHECK_THROWS_AS(point_capacity_positive(CapacityParams{}, 3), ParameterError);
}

TEST_CASE("ball scaling is exact and matches independent variational solves") {
    CapacityParams p;
    p.alpha = 1.0;
    p.s = 2.0;
    CapacityEstimate c1 = capacity_ball(p, 1.0, 3, 0.0625);
    CapacityEstimate c2 = capacity_ball(p, 2.0, 3, 0.0625);
    CapacityEstimate ch = capacity_ball(p, 0.5, 3, 0.0625);
    CHECK(c2.value / c1.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ch.value / c1.value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c1.value == *c1.reference);  // unit radius returns the reference

    // independent solves at several radii: fitted slope within 5% of N - As
    double radii[3] = {0.5, 1.0, 2.0};
    double logs[3];
    for (int i = 0; i < 3; ++i) {
        Region ball = Region::make_ball({0.0, 0.0, 0.0}, radii[i]);
        logs[i] = std::log(capacity_variational(p, ball, 0.0625).value);
    }
    const double slope = (logs[2] - logs[0]) / (std::log(radii[2]) - std::log(radii[0]));
    CHECK(slope == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("refining the ball resolution moves the value by less than 10 percent") {
    CapacityParams p;
    p.alpha = 1.0;
    p.s = 2.0;
    Region ball = Region::make_ball({0.0, 0.0, 0.0}, 1.0);
    const double coarse = capacity_variational(p, ball, 1.0 / 16.0).value;
    const double fine = capacity_variational(p, ball, 1.0 / 32.0).value;
    CHECK(std::abs(fine - coarse) / coarse < 0.10);
}

TEST_CASE("capacity grows with the set") {
    CapacityParams p;
    p.alpha = 1.0;
    p.s = 2.0;
    SolveOptions opts;
    Region small = Region::make_box(Box::cube(3, 0.0, 1.0));
    Region large = Region::make_box(Box::cube(3, 0.0, 2.0));
    const double cs = capacity_variational(p, small, 0.25, opts).value;
    const double cl = capacity_variational(p, large, 0.25, opts).value;
    CHECK(cs < cl);
}

TEST_CASE("optimizer reaches the single-constraint closed form") {
    // One boundary cell in the weighted program: the support is a short slab
    // of cells above it and the optimum has the explicit dual form
    // (sum_i k_i^{s'} w_i)^{1-s}.
    CapacityParams p;
    p.kind = CapacityKind::weighted_halfspace;
    p.alpha = 1.5;
    p.s = 2.0;
    const double h = 0.25;
    Box e;
    e.lo = {0.0, 0.0, 0.0};
    e.hi = {h, h, 0.0};
    SolveOptions opts;
    opts.iterations = 4000;
    CapacityEstimate est = capacity_variational(p, Region::make_box(e), h, opts);

    const double sp = p.s / (p.s - 1.0);
    double T = 0.0;
    for (int k = 0; k < 4; ++k) {  // default slab depth is 4h
        const double y = (k + 0.5) * h;
        const double w = y * h * h * h;
        const double kernel = std::pow(y, p.alpha - 3.0);
        T += std::pow(kernel * w, sp) * std::pow(w, 1.0 - sp);
    }
    const double exact = std::pow(T, 1.0 - p.s);
    CHECK(est.value == doctest::Approx(exact).epsilon(0.02));
    CHECK(est.converged);
}

TEST_CASE("condition ratios recover a synthesized constant") {
    CapacityParams p;
    p.alpha = 1.0;
    p.s = 2.0;
    const double c = 3.7;
    const double cap1 = capacity_ball(p, 1.0, 3, 0.0625).value;
    DiscreteMeasure omega;
    omega.dim = 3;
    omega.add_atom(std::vector<double>{0.0, 0.0, 0.0}, c * cap1);
    omega.add_atom(std::vector<double>{10.0, 0.0, 0.0}, c * cap1);
    omega.canonicalize();
    std::vector<Region> family = {
        Region::make_ball({0.0, 0.0, 0.0}, 1.0),
        Region::make_ball({10.0, 0.0, 0.0}, 1.0),
    };
    ConditionReport rep = condition_check(omega, p, family, std::nullopt, 0.0625);
    CHECK(rep.max_ratio == doctest::Approx(c).epsilon(1e-10));
    CHECK(rep.passed);
    CHECK_FALSE(rep.diverging);
}

TEST_CASE("condition sweep flags divergence and null sets") {
    DiscreteMeasure dirac = point_mass({0.0, 0.0, 0.0}, 1.0);
    std::vector<Region> family = dyadic_ball_family(dirac, 1.0, 6);
    CHECK(family.size() == 6);

    // zero point capacity: ratios blow up along shrinking balls
    CapacityParams fading;
    fading.alpha = 1.0;
    fading.s = 1.5;  // N - As = 1.5, growth 2^4.5 > 10 per three shrinks
    ConditionReport rep = condition_check(dirac, fading, family, std::nullopt, 0.0625);
    CHECK(rep.diverging);
    CHECK_FALSE(rep.mass_on_null_set);

    // all compacts null: infinite ratio, condition violated
    CapacityParams null_kind;
    null_kind.alpha = 3.0;
    null_kind.s = 2.0;
    ConditionReport rep2 = condition_check(dirac, null_kind, family, std::nullopt, 0.0625);
    CHECK(rep2.mass_on_null_set);
    CHECK(std::isinf(rep2.max_ratio));
    CHECK_FALSE(rep2.passed);

    // positive point capacity: ratios stay bounded
    CapacityParams point_kind;
    point_kind.kind = CapacityKind::bessel;
    point_kind.alpha = 3.5;
    point_kind.s = 2.0;
    ConditionReport rep3 = condition_check(dirac, point_kind, family, std::nullopt, 0.0625);
    CHECK_FALSE(rep3.diverging);
    CHECK_FALSE(rep3.mass_on_null_set);
    CHECK(std::isfinite(rep3.max_ratio));

    // zero measure: every ratio vanishes
    DiscreteMeasure zero;
    zero.dim = 3;
    zero.add_atom(std::vector<double>{0.0, 0.0, 0.0}, 0.0);
    ConditionReport rep4 = condition_check(zero, fading, family, std::nullopt, 0.0625);
    CHECK(rep4.max_ratio == 0.0);
    CHECK(rep4.passed);
}

TEST_CASE("parameter rejections") {
    CapacityParams p;
    p.alpha = 2.0;
    p.s = 2.0;  // As = 4 >= 3 but A < 3: no finite-energy regime
    CHECK_THROWS_AS(capacity_ball(p, 1.0, 3, 0.0625), ParameterError);

    CapacityParams w;
    w.kind = CapacityKind::weighted_halfspace;
    w.alpha = 1.0;
    CHECK_THROWS_AS(capacity_ball(w, 1.0, 3, 0.0625), ParameterError);

    CapacityParams b;
    b.kind = CapacityKind::bessel;
    b.alpha = 1.0;
    b.s = 2.0;
    CHECK_THROWS_AS(capacity_ball(b, 2.0, 3, 0.0625), ParameterError);  // above R_B
    CHECK_NOTHROW(capacity_ball(b, 0.5, 3, 0.0625));

    CapacityParams bad;
    bad.s = 1.0;
    CHECK_THROWS_AS(capacity_zero_test(bad, 3), ParameterError);
    bad.s = 2.0;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(capacity_zero_test(bad, 3), ParameterError);

    CapacityParams high;
    high.alpha = 3.0;
    high.s = 2.0;
    Region ball = Region::make_ball({0.0, 0.0, 0.0}, 1.0);
    CHECK_THROWS_AS(capacity_variational(high, ball, 0.125), ParameterError);
}

}  // TEST_SUITE
