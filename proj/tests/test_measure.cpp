#include "doctest.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "wolffkit/measure.hpp"

using namespace wolffkit;

namespace {

// Reference mass queries written independently of the library scan order.
double naive_ball_mass(const DiscreteMeasure& m, const std::vector<double>& x, double r) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.atom_count(); ++i) {
        double d2 = 0.0;
        for (int d = 0; d < m.dim; ++d) {
            const double g = m.atom_coords[i * m.dim + d] - x[d];
            d2 += g * g;
        }
        if (d2 <= r * r) s += m.atom_weights[i];
    }
    if (m.density) {
        const GridDensity& g = *m.density;
        std::vector<double> c(g.dim());
        for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
            g.cell_center(cell, c.data());
            double d2 = 0.0;
            for (int d = 0; d < g.dim(); ++d) {
                const double off = c[d] - x[d];
                d2 += off * off;
            }
            if (d2 <= r * r) s += g.values[cell] * g.cell_volume();
        }
    }
    return s;
}

double naive_box_mass(const DiscreteMeasure& m, const Box& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.atom_count(); ++i) {
        bool in = true;
        for (int d = 0; d < m.dim; ++d) {
            const double c = m.atom_coords[i * m.dim + d];
            if (c < b.lo[d] || c > b.hi[d]) { in = false; break; }
        }
        if (in) s += m.atom_weights[i];
    }
    if (m.density) {
        const GridDensity& g = *m.density;
        std::vector<double> c(g.dim());
        for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
            g.cell_center(cell, c.data());
            bool in = true;
            for (int d = 0; d < g.dim(); ++d)
                if (c[d] < b.lo[d] || c[d] > b.hi[d]) { in = false; break; }
            if (in) s += g.values[cell] * g.cell_volume();
        }
    }
    return s;
}

DiscreteMeasure random_measure(std::uint64_t seed, int atoms, bool with_density) {
    Rng rng(seed);
    DiscreteMeasure m;
    m.dim = 3;
    for (int i = 0; i < atoms; ++i) {
        double x[3] = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        m.add_atom(std::span<const double>(x, 3), rng.uniform(0.0, 3.0));
    }
    if (with_density) {
        GridDensity g;
        g.origin = {-1.0, -0.5, -1.5};
        g.spacing = 0.25;
        g.shape = {8, 7, 6};
        g.values.resize(g.cell_count());
        for (auto& v : g.values) v = rng.uniform(0.0, 2.0);
        m.density = std::move(g);
    }
    m.canonicalize();
    return m;
}

}  // namespace

TEST_SUITE("measure") {

TEST_CASE("atoms are kept in canonical order") {
    DiscreteMeasure m;
    m.dim = 2;
    const double a[2] = {1.0, 0.0};
    const double b[2] = {0.0, 5.0};
    const double c[2] = {0.0, 2.0};
    m.add_atom(a, 1.0);
    m.add_atom(b, 2.0);
    m.add_atom(c, 3.0);
    m.canonicalize();
    CHECK(m.atom_coords == std::vector<double>{0.0, 2.0, 0.0, 5.0, 1.0, 0.0});
    CHECK(m.atom_weights == std::vector<double>{3.0, 2.0, 1.0});

    // duplicate coordinates order by weight
    DiscreteMeasure n;
    n.dim = 1;
    const double p[1] = {0.5};
    n.add_atom(p, 2.0);
    n.add_atom(p, 1.0);
    n.canonicalize();
    CHECK(n.atom_weights == std::vector<double>{1.0, 2.0});
}

TEST_CASE("negative weights and values are rejected") {
    DiscreteMeasure m;
    m.dim = 1;
    const double x[1] = {0.0};
    CHECK_THROWS_AS(m.add_atom(x, -1.0), ParameterError);

    GridDensity g;
    g.origin = {0.0};
    g.spacing = 1.0;
    g.shape = {2};
    g.values = {1.0, -0.5};
    CHECK_THROWS_AS(g.validate(), ParameterError);
}

TEST_CASE("closed balls include boundary atoms exactly") {
    DiscreteMeasure m;
    m.dim = 3;
    const double y[3] = {1.0, 0.0, 0.0};
    m.add_atom(y, 2.5);
    m.canonicalize();
    const std::vector<double> x = {0.0, 0.0, 0.0};
    CHECK(ball_mass_brute(m, x, 1.0) == 2.5);
    CHECK(ball_mass_brute(m, x, std::nextafter(1.0, 0.0)) == 0.0);
    BallMassIndex idx(m);
    CHECK(idx.ball_mass(x, 1.0) == 2.5);
    CHECK(idx.ball_mass(x, std::nextafter(1.0, 0.0)) == 0.0);
}

TEST_CASE("indexed ball mass matches the brute scan bit for bit") {
    for (std::uint64_t seed : {11u, 12u}) {
        DiscreteMeasure m = random_measure(seed, 50, seed == 12u);
        BallMassIndex idx(m);
        Rng rng(seed * 977 + 5);
        for (int t = 0; t < 200; ++t) {
            std::vector<double> x = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0),
                                     rng.uniform(-3.0, 3.0)};
            const double r = rng.uniform(0.0, 4.0);
            const double brute = ball_mass_brute(m, x, r);
            CHECK(idx.ball_mass(x, r) == brute);
            CHECK(brute == doctest::Approx(naive_ball_mass(m, x, r)).epsilon(1e-12));
        }
    }
}

TEST_CASE("box mass agrees with a naive membership scan") {
    DiscreteMeasure m = random_measure(21, 30, true);
    BallMassIndex idx(m);
    Rng rng(404);
    for (int t = 0; t < 100; ++t) {
        Box b;
        b.lo.resize(3);
        b.hi.resize(3);
        for (int d = 0; d < 3; ++d) {
            const double a = rng.uniform(-2.5, 2.5);
            const double c = rng.uniform(-2.5, 2.5);
            b.lo[d] = std::min(a, c);
            b.hi[d] = std::max(a, c);
        }
        CHECK(idx.box_mass(b) == doctest::Approx(naive_box_mass(m, b)).epsilon(1e-10));
    }
}

TEST_CASE("total mass and support box") {
    DiscreteMeasure m;
    m.dim = 2;
    const double a[2] = {-1.0, 2.0};
    const double b[2] = {3.0, -0.5};
    m.add_atom(a, 1.5);
    m.add_atom(b, 0.5);
    GridDensity g;
    g.origin = {0.0, 0.0};
    g.spacing = 0.5;
    g.shape = {2, 2};
    g.values = {1.0, 0.0, 0.0, 3.0};
    m.density = g;
    m.canonicalize();
    CHECK(m.total_mass() == doctest::Approx(2.0 + 4.0 * 0.25).epsilon(1e-15));
    const Box s = m.support_box();
    CHECK(s.lo[0] == -1.0);
    CHECK(s.hi[0] == 3.0);
    CHECK(s.lo[1] == -0.5);
    CHECK(s.hi[1] == 2.0);

    DiscreteMeasure e;
    e.dim = 2;
    CHECK_THROWS_AS(e.support_box(), DataError);
}

TEST_CASE("restriction keeps interior mass and drops the rest") {
    DiscreteMeasure m = random_measure(31, 20, true);
    const std::vector<double> c = {0.0, 0.0, 0.0};
    Region ball = Region::make_ball(c, 1.25);
    DiscreteMeasure r = restrict_measure(m, ball);
    CHECK(r.total_mass() == doctest::Approx(naive_ball_mass(m, c, 1.25)).epsilon(1e-12));
    for (std::size_t i = 0; i < r.atom_count(); ++i) {
        double d2 = 0.0;
        for (int d = 0; d < 3; ++d) {
            const double g = r.atom_coords[i * 3 + d] - c[d];
            d2 += g * g;
        }
        CHECK(d2 <= 1.25 * 1.25);
    }
}

TEST_CASE("measure files round trip") {
    DiscreteMeasure m = random_measure(77, 6, true);
    std::ostringstream out;
    write_measure(out, m, true);
    std::istringstream in(out.str());
    MeasureFile back = parse_measure(in);
    CHECK(back.boundary);
    CHECK(back.measure.dim == 3);
    CHECK(back.measure.atom_coords == m.atom_coords);
    CHECK(back.measure.atom_weights == m.atom_weights);
    REQUIRE(back.measure.density.has_value());
    CHECK(back.measure.density->values == m.density->values);
    CHECK(back.measure.density->origin == m.density->origin);
    CHECK(back.measure.density->spacing == m.density->spacing);
}

TEST_CASE("parser reports malformed input as data errors") {
    auto parse = [](const char* text) {
        std::istringstream in(text);
        return parse_measure(in);
    };
    CHECK_THROWS_AS(parse("atom 0 0 0 1\n"), DataError);              // missing header
    CHECK_THROWS_AS(parse("measure N=3\natom 0 0 1\n"), DataError);   // short atom line
    CHECK_THROWS_AS(parse("measure N=2\natom 0 0 -1\n"), DataError);  // negative weight
    CHECK_THROWS_AS(parse("measure N=1\ndensity origin=0 h=0.5 shape=3\n1 2\n"), DataError);
    CHECK_THROWS_AS(parse("measure N=1\nfrobnicate 1\n"), DataError);

    std::istringstream good("# comment\nmeasure N=2 boundary\natom 0.5 -1 2\n");
    MeasureFile ok = parse_measure(good);
    CHECK(ok.boundary);
    CHECK(ok.measure.atom_weights == std::vector<double>{2.0});
}

}  // TEST_SUITE
