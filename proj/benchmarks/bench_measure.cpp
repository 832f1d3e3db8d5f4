#include <benchmark/benchmark.h>

#include "wolffkit/measure.hpp"

using namespace wolffkit;

namespace {

DiscreteMeasure make_scene(int atoms, int grid) {
    Rng rng(13);
    DiscreteMeasure m;
    m.dim = 3;
    for (int i = 0; i < atoms; ++i) {
        std::vector<double> x = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                                 rng.uniform(-1.0, 1.0)};
        m.add_atom(x, rng.uniform(0.1, 1.0));
    }
    if (grid > 0) {
        GridDensity g;
        g.origin = {-1.0, -1.0, -1.0};
        g.spacing = 2.0 / grid;
        g.shape = {grid, grid, grid};
        g.values.resize(g.cell_count());
        for (auto& v : g.values) v = rng.uniform(0.0, 1.0);
        m.density = std::move(g);
    }
    m.canonicalize();
    return m;
}

}  // namespace

static void BM_BallMassBrute(benchmark::State& state) {
    DiscreteMeasure m = make_scene(64, static_cast<int>(state.range(0)));
    const std::vector<double> x = {0.1, -0.2, 0.3};
    for (auto _ : state)
        benchmark::DoNotOptimize(ball_mass_brute(m, x, 0.8));
}
BENCHMARK(BM_BallMassBrute)->Arg(16)->Arg(32);

static void BM_BallMassIndexed(benchmark::State& state) {
    DiscreteMeasure m = make_scene(64, static_cast<int>(state.range(0)));
    BallMassIndex idx(m);
    const std::vector<double> x = {0.1, -0.2, 0.3};
    for (auto _ : state)
        benchmark::DoNotOptimize(idx.ball_mass(x, 0.8));
}
BENCHMARK(BM_BallMassIndexed)->Arg(16)->Arg(32);

static void BM_BoxMassIndexed(benchmark::State& state) {
    DiscreteMeasure m = make_scene(64, 32);
    BallMassIndex idx(m);
    Box b = Box::cube(3, -0.5, 0.7);
    for (auto _ : state)
        benchmark::DoNotOptimize(idx.box_mass(b));
}
BENCHMARK(BM_BoxMassIndexed);

BENCHMARK_MAIN();
