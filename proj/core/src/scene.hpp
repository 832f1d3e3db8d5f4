#pragma once

// Shared lattice/sampling plumbing for the estimate checkers.  Private to the
// library; not installed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "wolffkit/common.hpp"
#include "wolffkit/measure.hpp"
#include "wolffkit/potential.hpp"

namespace wolffkit::detail {

// Cube around the measure with breathing room: half the larger of the support
// diameter and 1 on every side.
inline Box scene_cube(const Box& support) {
    const int n = support.dim();
    double half = 0.0;
    for (int d = 0; d < n; ++d)
        half = std::max(half, 0.5 * (support.hi[d] - support.lo[d]));
    const double w = half + 0.5 * std::max(support.diameter(), 1.0);
    Box cube;
    cube.lo.resize(static_cast<std::size_t>(n));
    cube.hi.resize(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) {
        const double c = 0.5 * (support.lo[d] + support.hi[d]);
        cube.lo[d] = c - w;
        cube.hi[d] = c + w;
    }
    return cube;
}

inline Lattice scene_lattice(const Box& cube, int grid) {
    Lattice lat;
    lat.box = cube;
    lat.shape.assign(static_cast<std::size_t>(cube.dim()), grid);
    lat.shift = 0.5;
    return lat;
}

inline std::vector<Point> sample_points(const Box& cube, int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Point> pts(static_cast<std::size_t>(count));
    const int n = cube.dim();
    for (auto& p : pts) {
        p.resize(static_cast<std::size_t>(n));
        for (int d = 0; d < n; ++d) p[d] = rng.uniform(cube.lo[d], cube.hi[d]);
    }
    return pts;
}

// True when some atom sits within 1e-7 cells of its nearest lattice node.
// Such a node carries a near-singular field value that poisons later stages
// without ever tripping the sentinel, so the lattice gets re-offset first.
inline bool node_on_atom(const DiscreteMeasure& m, const Lattice& lat) {
    for (std::size_t i = 0; i < m.atom_count(); ++i) {
        const auto a = m.atom(i);
        double d2 = 0.0;
        for (int d = 0; d < lat.dim(); ++d) {
            const double h = lat.step(d);
            const double u = (a[static_cast<std::size_t>(d)] - lat.box.lo[d]) / h - lat.shift;
            double k = std::round(u);
            k = std::min(std::max(k, 0.0), static_cast<double>(lat.shape[static_cast<std::size_t>(d)] - 1));
            const double off = (u - k) * h;
            d2 += off * off;
        }
        const double tol = 1e-7 * lat.step(0);
        if (d2 < tol * tol) return true;
    }
    return false;
}

// Field of m over the lattice raised to `power`, returned as a density
// measure.  A node on an atom flags the sentinel; the lattice is re-offset
// once and left that way for the caller's later stages.
inline DiscreteMeasure densified_power(const DiscreteMeasure& m, const PotentialParams& p,
                                       const QuadratureRule& q, Lattice& lat, double power,
                                       int threads) {
    if (lat.shift == 0.5 && node_on_atom(m, lat)) lat.shift = 0.25;
    GridFunction f = wolff_field(m, p, q, lat, threads);
    if (f.sentinel_count() > 0) {
        lat.shift = 0.25;
        f = wolff_field(m, p, q, lat, threads);
        if (f.sentinel_count() > 0)
            throw DataError("field lattice keeps hitting atoms of the measure");
    }
    DiscreteMeasure out;
    out.dim = lat.dim();
    out.density = f.power(power).to_density();
    return out;
}

}  // namespace wolffkit::detail
