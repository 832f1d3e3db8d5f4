#include <benchmark/benchmark.h>

#include "wolffkit/potential.hpp"

using namespace wolffkit;

namespace {

DiscreteMeasure bench_measure(int atoms, int grid) {
    Rng rng(29);
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

static void BM_WolffPointAtoms(benchmark::State& state) {
    DiscreteMeasure m = bench_measure(static_cast<int>(state.range(0)), 0);
    PotentialParams p;
    p.dim = 3;
    const std::vector<double> x = {0.15, -0.35, 0.2};
    for (auto _ : state)
        benchmark::DoNotOptimize(wolff(m, p, QuadratureRule{}, x));
}
BENCHMARK(BM_WolffPointAtoms)->Arg(8)->Arg(64)->Arg(512);

static void BM_WolffPointDensity(benchmark::State& state) {
    DiscreteMeasure m = bench_measure(4, static_cast<int>(state.range(0)));
    PotentialParams p;
    p.dim = 3;
    const std::vector<double> x = {0.15, -0.35, 0.2};
    for (auto _ : state)
        benchmark::DoNotOptimize(wolff(m, p, QuadratureRule{}, x));
}
BENCHMARK(BM_WolffPointDensity)->Arg(16)->Arg(33);

static void BM_WolffField(benchmark::State& state) {
    DiscreteMeasure m = bench_measure(8, 0);
    PotentialParams p;
    p.dim = 3;
    Lattice lat;
    lat.box = Box::cube(3, -1.5, 1.5);
    const int n = static_cast<int>(state.range(0));
    lat.shape = {n, n, n};
    for (auto _ : state)
        benchmark::DoNotOptimize(wolff_field(m, p, QuadratureRule{}, lat, 1));
}
BENCHMARK(BM_WolffField)->Arg(9)->Arg(17)->Unit(benchmark::kMillisecond);
