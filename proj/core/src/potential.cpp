#include "wolffkit/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>

namespace wolffkit {

namespace {
// Head sums beyond this are reported as the +infinity sentinel.
constexpr double kSentinelThreshold = 1e30;
}

// --------- truncation / params ---------

Truncation Truncation::fixed(double r) {
    if (!(r >= 0.0)) throw ParameterError("truncation radius must be nonnegative");
    Truncation t;
    t.kind = Kind::fixed_radius;
    t.radius = r;
    return t;
}

Truncation Truncation::adapted(double delta, Box domain) {
    if (!(delta > 0.0)) throw ParameterError("truncation delta must be positive");
    Truncation t;
    t.kind = Kind::distance_adapted;
    t.delta = delta;
    t.domain = std::move(domain);
    return t;
}

void PotentialParams::validate() const {
    if (dim < 1) throw ParameterError("potential dimension must be at least 1");
    if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
    if (beta < 1.0 + 1e-6)
        throw ParameterError("beta must be at least 1 + 1e-6");
    if (trunc.kind == Truncation::Kind::full && !(alpha * beta < static_cast<double>(dim)))
        throw ParameterError("full-range potential needs kernel order alpha*beta < dimension");
}

// --------- radial quadrature ---------

namespace {

struct Entry {
    double r;
    double r2;
    double t;   // log r
    double rp;  // r^{-(N - alpha*beta)}
    bool closed;  // cumulative mass includes mass at distance exactly r
};

struct Scratch {
    std::vector<Entry> entries;
    std::vector<double> cum;     // bucket sums, then prefix-summed in place
    std::vector<double> jumps;   // sorted unique atom distances in the window
    std::vector<double> atom_d2;
    std::vector<double> axis_sq[3];
    // integer-offset bucketing for grid-aligned points
    std::vector<std::int32_t> utab;
    std::vector<std::int64_t> axis_iu[3];
    // base-node geometry reused while the quadrature window is unchanged
    double ck_rmin = -1.0, ck_whi = -1.0, ck_corder = 0.0;
    int ck_nodes = 0;
    std::vector<double> base_r, base_t, base_rp;
};

struct Shared {
    const DiscreteMeasure* m = nullptr;
    PotentialParams p;
    QuadratureRule q;
    int N = 0;
    double expo = 1.0;    // 1/(beta-1)
    double corder = 0.0;  // N - alpha*beta
    double total_mass = 0.0;
    Box support;
    double h4 = kInfinity;  // density resolution floor h/4
};

Shared prepare(const DiscreteMeasure& m, const PotentialParams& p, const QuadratureRule& q) {
    p.validate();
    if (p.dim != m.dim) throw ParameterError("potential/measure dimension mismatch");
    if (q.nodes < 16) throw ParameterError("quadrature needs at least 16 nodes");
    if (q.r_min < 0.0 || q.r_max < 0.0)
        throw ParameterError("quadrature radii must be nonnegative");
    if (q.r_min > 0.0 && q.r_max > 0.0 && !(q.r_max > q.r_min))
        throw ParameterError("quadrature window is empty");
    Shared sh;
    sh.m = &m;
    sh.p = p;
    sh.q = q;
    sh.N = p.dim;
    sh.expo = 1.0 / (p.beta - 1.0);
    sh.corder = static_cast<double>(p.dim) - p.alpha * p.beta;
    if (!m.empty()) {
        sh.total_mass = m.total_mass();
        sh.support = m.support_box();
    }
    if (m.density) sh.h4 = m.density->spacing / 4.0;
    return sh;
}

double point_box_distance(std::span<const double> x, const Box& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        double gap = 0.0;
        if (x[d] < b.lo[d]) gap = b.lo[d] - x[d];
        else if (x[d] > b.hi[d]) gap = x[d] - b.hi[d];
        s += gap * gap;
    }
    return std::sqrt(s);
}

// Closed-form  int_a^b (M r^{-(N-A)})^{1/(beta-1)} dr/r ; b may be infinite
// when the decay exponent is positive.
double power_tail(double mass, double expo, double corder, double a, double b) {
    if (mass <= 0.0) return 0.0;
    const double e = corder * expo;
    const double mexp = std::pow(mass, expo);
    if (std::isinf(b)) {
        return mexp * std::pow(a, -e) / e;
    }
    if (std::abs(e) < 1e-14) return mexp * std::log(b / a);
    return mexp * (std::pow(a, -e) - std::pow(b, -e)) / e;
}

// First entry covering distance d (closed-ball semantics): smallest index
// with r > d, or r == d and the entry closed.
std::size_t bucket_index(const std::vector<Entry>& entries, double d2) {
    auto it = std::lower_bound(entries.begin(), entries.end(), d2,
                               [](const Entry& e, double key) {
                                   if (e.r2 != key) return e.r2 < key;
                                   return !e.closed;
                               });
    return static_cast<std::size_t>(it - entries.begin());
}

double eval_point(const Shared& sh, std::span<const double> x, Scratch& sc) {
    const DiscreteMeasure& m = *sh.m;
    if (static_cast<int>(x.size()) != sh.N)
        throw ParameterError("evaluation point dimension mismatch");
    if (m.empty()) return 0.0;

    // Upper integration limit.
    double limit = kInfinity;
    switch (sh.p.trunc.kind) {
        case Truncation::Kind::full: break;
        case Truncation::Kind::fixed_radius:
            limit = sh.p.trunc.radius;
            break;
        case Truncation::Kind::distance_adapted: {
            const Box& dom = sh.p.trunc.domain;
            if (dom.dim() != sh.N) throw ParameterError("truncation domain dimension mismatch");
            if (!dom.contains(x)) throw ParameterError("point outside truncation domain");
            limit = sh.p.trunc.delta * dom.boundary_distance(x);
            break;
        }
    }
    if (limit <= 0.0) return 0.0;

    // Atom geometry: sentinel at atoms, jump radii inside the window.
    sc.atom_d2.clear();
    double nearest2 = kInfinity;
    for (std::size_t i = 0; i < m.atom_count(); ++i) {
        if (m.atom_weights[i] <= 0.0) {
            sc.atom_d2.push_back(-1.0);  // ignored
            continue;
        }
        const double d2 = squared_distance(m.atom(i), x);
        if (d2 == 0.0) return kInfinity;
        sc.atom_d2.push_back(d2);
        nearest2 = std::min(nearest2, d2);
    }

    double r_min = sh.q.r_min;
    if (r_min == 0.0) {
        r_min = std::min(sh.h4, std::isinf(nearest2) ? kInfinity : std::sqrt(nearest2) / 8.0);
        if (std::isinf(r_min)) return 0.0;  // no positive mass anywhere
    }
    if (limit <= r_min) return 0.0;

    const double diam = sh.support.diameter();
    const double dist = point_box_distance(x, sh.support);
    double r_max = sh.q.r_max;
    if (r_max == 0.0) r_max = 2.0 * (diam + dist);
    if (!(r_max > r_min)) r_max = 2.0 * r_min;
    const double window_hi = std::min(r_max, limit);

    // Node set: log-uniform nodes plus two-sided atom breakpoints, so the
    // trapezoid never averages across a mass jump.
    const int M = sh.q.nodes;
    const double t0 = std::log(r_min);
    const double t1 = std::log(window_hi);
    const double dt = (t1 - t0) / static_cast<double>(M - 1);

    // Jump radii are kept squared throughout, so an atom's bucket key matches
    // its own breakpoint entry bit for bit.
    const double rmin2 = r_min * r_min;
    const double whi2 = window_hi * window_hi;
    sc.jumps.clear();
    for (double d2 : sc.atom_d2) {
        if (d2 > rmin2 && d2 < whi2) sc.jumps.push_back(d2);
    }
    std::sort(sc.jumps.begin(), sc.jumps.end());
    sc.jumps.erase(std::unique(sc.jumps.begin(), sc.jumps.end()), sc.jumps.end());

    // Base-node radii, logs and kernel powers depend only on the window, which
    // is the same for most points of a field sweep; recompute on change only.
    if (!(sc.ck_rmin == r_min && sc.ck_whi == window_hi && sc.ck_nodes == M &&
          sc.ck_corder == sh.corder)) {
        sc.ck_rmin = r_min;
        sc.ck_whi = window_hi;
        sc.ck_nodes = M;
        sc.ck_corder = sh.corder;
        sc.base_r.resize(static_cast<std::size_t>(M));
        sc.base_t.resize(static_cast<std::size_t>(M));
        sc.base_rp.resize(static_cast<std::size_t>(M));
        for (int k = 0; k < M; ++k) {
            const double r = (k == 0) ? r_min
                           : (k == M - 1) ? window_hi
                                          : std::exp(t0 + dt * static_cast<double>(k));
            sc.base_r[static_cast<std::size_t>(k)] = r;
            sc.base_t[static_cast<std::size_t>(k)] = std::log(r);
            sc.base_rp[static_cast<std::size_t>(k)] = std::pow(r, -sh.corder);
        }
    }

    sc.entries.clear();
    sc.entries.reserve(static_cast<std::size_t>(M) + 2 * sc.jumps.size());
    std::size_t jp = 0;
    for (int k = 0; k < M; ++k) {
        const double r = sc.base_r[static_cast<std::size_t>(k)];
        const double lt = sc.base_t[static_cast<std::size_t>(k)];
        const double rp = sc.base_rp[static_cast<std::size_t>(k)];
        const double nr2 = r * r;
        while (jp < sc.jumps.size() && sc.jumps[jp] < nr2) {
            const double d2 = sc.jumps[jp++];
            const double d = std::sqrt(d2);
            const double jt = std::log(d);
            const double jrp = std::pow(d, -sh.corder);
            sc.entries.push_back({d, d2, jt, jrp, false});
            sc.entries.push_back({d, d2, jt, jrp, true});
        }
        if (jp < sc.jumps.size() && sc.jumps[jp] == nr2) {
            // Breakpoint coincides with a node: the node acts as the closed copy.
            sc.entries.push_back({r, nr2, lt, rp, false});
            ++jp;
        }
        sc.entries.push_back({r, nr2, lt, rp, true});
    }

    const std::size_t ne = sc.entries.size();
    sc.cum.assign(ne, 0.0);

    // Atoms.
    for (std::size_t i = 0; i < m.atom_count(); ++i) {
        const double d2 = sc.atom_d2[i];
        if (d2 < 0.0) continue;
        if (d2 > whi2) continue;  // covered by the analytic tail, if any
        sc.cum[bucket_index(sc.entries, d2)] += m.atom_weights[i];
    }

    // Density cells, row-major, bucketed by center distance.
    if (m.density) {
        const GridDensity& g = *m.density;
        const int gd = g.dim();
        const double cv = g.cell_volume();
        const Entry* ent = sc.entries.data();
        double* cum = sc.cum.data();
        const double* vals = g.values.data();

        // Points sitting on cell centers (lattice sweeps over the density's
        // own grid) admit exact integer squared offsets u = sum (i_d - ix_d)^2,
        // so one small table u -> bucket replaces all per-cell distance work.
        // Points within 1e-6 cells of a center are snapped to it, which is far
        // below quadrature resolution.
        std::int64_t tix[3] = {0, 0, 0};
        bool aligned = true;
        for (int d = 0; d < gd && aligned; ++d) {
            const double tr = (x[d] - g.origin[d]) / g.spacing - 0.5;
            const double t = std::round(tr);
            if (!(std::abs(t) <= 1e6) || !(std::abs(tr - t) <= 1e-6))
                aligned = false;
            else
                tix[d] = static_cast<std::int64_t>(t);
        }
        std::int64_t umax = 0;
        if (aligned) {
            for (int d = 0; d < gd; ++d) {
                const std::int64_t lo = -tix[d];
                const std::int64_t hi = static_cast<std::int64_t>(g.shape[d]) - 1 - tix[d];
                umax += std::max(lo * lo, hi * hi);
            }
            if (umax >= (std::int64_t{1} << 21)) aligned = false;
        }

        if (aligned) {
            const double h2 = g.spacing * g.spacing;
            sc.utab.assign(static_cast<std::size_t>(umax) + 1, -1);
            std::int32_t* tab = sc.utab.data();
            std::size_t pos = 0;
            for (std::int64_t u = 0; u <= umax; ++u) {
                const double d2 = h2 * static_cast<double>(u);
                if (d2 > whi2) break;  // monotone: the rest stay out of window
                while (pos < ne &&
                       (ent[pos].r2 != d2 ? ent[pos].r2 < d2 : !ent[pos].closed))
                    ++pos;
                tab[u] = static_cast<std::int32_t>(pos);
            }
            for (int d = 0; d < gd; ++d) {
                auto& iu = sc.axis_iu[d];
                iu.resize(static_cast<std::size_t>(g.shape[d]));
                for (int i = 0; i < g.shape[d]; ++i) {
                    const std::int64_t off = static_cast<std::int64_t>(i) - tix[d];
                    iu[static_cast<std::size_t>(i)] = off * off;
                }
            }
            if (gd == 1) {
                for (int i = 0; i < g.shape[0]; ++i) {
                    const std::int32_t b = tab[sc.axis_iu[0][i]];
                    const double v = vals[i];
                    if (b >= 0 && v > 0.0) cum[b] += v * cv;
                }
            } else if (gd == 2) {
                std::size_t c = 0;
                for (int i = 0; i < g.shape[0]; ++i) {
                    const std::int64_t u0 = sc.axis_iu[0][i];
                    for (int j = 0; j < g.shape[1]; ++j, ++c) {
                        const std::int32_t b = tab[u0 + sc.axis_iu[1][j]];
                        const double v = vals[c];
                        if (b >= 0 && v > 0.0) cum[b] += v * cv;
                    }
                }
            } else {
                const std::int64_t* iu2 = sc.axis_iu[2].data();
                std::size_t c = 0;
                for (int i = 0; i < g.shape[0]; ++i) {
                    const std::int64_t u0 = sc.axis_iu[0][i];
                    for (int j = 0; j < g.shape[1]; ++j) {
                        const std::int64_t u01 = u0 + sc.axis_iu[1][j];
                        for (int k = 0; k < g.shape[2]; ++k, ++c) {
                            const std::int32_t b = tab[u01 + iu2[k]];
                            const double v = vals[c];
                            if (b >= 0 && v > 0.0) cum[b] += v * cv;
                        }
                    }
                }
            }
        } else {
            for (int d = 0; d < gd; ++d) {
                auto& sq = sc.axis_sq[d];
                sq.resize(static_cast<std::size_t>(g.shape[d]));
                for (int i = 0; i < g.shape[d]; ++i) {
                    const double c = g.origin[d] + (static_cast<double>(i) + 0.5) * g.spacing;
                    const double off = c - x[d];
                    sq[static_cast<std::size_t>(i)] = off * off;
                }
            }
            // Cell distances along a row-major sweep move through few buckets
            // per step, so a carried cursor with exact two-sided correction
            // replaces the per-cell binary search; the resulting index is
            // still exactly bucket_index(entries, d2).
            std::size_t pos = 0;
            auto add_cell = [&](double d2, double value) {
                if (d2 > whi2 || value <= 0.0) return;
                while (pos < ne &&
                       (ent[pos].r2 != d2 ? ent[pos].r2 < d2 : !ent[pos].closed))
                    ++pos;
                while (pos > 0 &&
                       !(ent[pos - 1].r2 != d2 ? ent[pos - 1].r2 < d2 : !ent[pos - 1].closed))
                    --pos;
                cum[pos] += value * cv;
            };
            if (gd == 1) {
                for (int i = 0; i < g.shape[0]; ++i) add_cell(sc.axis_sq[0][i], vals[i]);
            } else if (gd == 2) {
                std::size_t c = 0;
                for (int i = 0; i < g.shape[0]; ++i) {
                    const double s0 = sc.axis_sq[0][i];
                    for (int j = 0; j < g.shape[1]; ++j, ++c)
                        add_cell(s0 + sc.axis_sq[1][j], vals[c]);
                }
            } else {
                std::size_t c = 0;
                for (int i = 0; i < g.shape[0]; ++i) {
                    const double s0 = sc.axis_sq[0][i];
                    for (int j = 0; j < g.shape[1]; ++j) {
                        const double s01 = s0 + sc.axis_sq[1][j];
                        for (int k = 0; k < g.shape[2]; ++k, ++c)
                            add_cell(s01 + sc.axis_sq[2][k], vals[c]);
                    }
                }
            }
        }
    }

    // Prefix sums give mu(B_r) per entry; then the log-space trapezoid.
    double run = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
        run += sc.cum[e];
        sc.cum[e] = run;
    }

    const Entry* ent = sc.entries.data();
    const bool linear = (sh.expo == 1.0);
    double head = 0.0;
    double f_prev = 0.0;
    double t_prev = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
        const double mass = sc.cum[e];
        double f = 0.0;
        if (mass > 0.0) {
            const double base = mass * ent[e].rp;
            f = linear ? base : std::pow(base, sh.expo);
        }
        if (e > 0) head += 0.5 * (f_prev + f) * (ent[e].t - t_prev);
        f_prev = f;
        t_prev = ent[e].t;
    }
    if (!(head <= kSentinelThreshold)) return kInfinity;

    double tail = 0.0;
    if (sh.q.tail == TailMode::analytic && limit > window_hi && window_hi == r_max) {
        // Beyond the automatic r_max the ball holds the whole measure, so the
        // integrand is an exact power law.
        tail = power_tail(sh.total_mass, sh.expo, sh.corder, r_max, limit);
        if (!(tail <= kSentinelThreshold)) return kInfinity;
    }
    return head + tail;
}

}  // namespace

double wolff(const DiscreteMeasure& m, const PotentialParams& p,
             const QuadratureRule& q, std::span<const double> x) {
    Shared sh = prepare(m, p, q);
    Scratch sc;
    return eval_point(sh, x, sc);
}

double riesz(const DiscreteMeasure& m, double order, const Truncation& trunc,
             const QuadratureRule& q, std::span<const double> x) {
    if (!(order > 0.0)) throw ParameterError("riesz order must be positive");
    PotentialParams p;
    p.dim = m.dim;
    p.alpha = order / 2.0;
    p.beta = 2.0;
    p.trunc = trunc;
    return wolff(m, p, q, x);
}

double riesz_kernel_sum(const DiscreteMeasure& m, double order, std::span<const double> x) {
    if (!(order > 0.0)) throw ParameterError("riesz order must be positive");
    if (static_cast<int>(x.size()) != m.dim)
        throw ParameterError("evaluation point dimension mismatch");
    const double e = order - static_cast<double>(m.dim);
    double s = 0.0;
    for (std::size_t i = 0; i < m.atom_count(); ++i) {
        if (m.atom_weights[i] <= 0.0) continue;
        const double d2 = squared_distance(m.atom(i), x);
        if (d2 == 0.0) return kInfinity;
        s += m.atom_weights[i] * std::pow(std::sqrt(d2), e);
    }
    if (m.density) {
        const GridDensity& g = *m.density;
        const double cv = g.cell_volume();
        std::vector<double> center(g.dim());
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            if (g.values[c] <= 0.0) continue;
            g.cell_center(c, center.data());
            const double d2 = squared_distance(center, x);
            if (d2 == 0.0) return kInfinity;
            s += g.values[c] * cv * std::pow(std::sqrt(d2), e);
        }
    }
    return s;
}

// --------- lattice / fields ---------

std::size_t Lattice::node_count() const {
    std::size_t n = 1;
    for (int s : shape) n *= static_cast<std::size_t>(s);
    return n;
}

double Lattice::step(int axis) const {
    return (box.hi[axis] - box.lo[axis]) / static_cast<double>(shape[axis]);
}

bool Lattice::uniform_step() const {
    // box corners are rounded per axis, so allow last-ulp noise
    for (int d = 1; d < dim(); ++d)
        if (std::abs(step(d) - step(0)) > 1e-12 * std::abs(step(0))) return false;
    return true;
}

void Lattice::node(std::size_t flat, double* out) const {
    const int n = dim();
    std::size_t rest = flat;
    for (int d = n - 1; d >= 0; --d) {
        const std::size_t extent = static_cast<std::size_t>(shape[d]);
        const std::size_t idx = rest % extent;
        rest /= extent;
        out[d] = box.lo[d] + (static_cast<double>(idx) + shift) * step(d);
    }
}

void Lattice::validate() const {
    if (shape.empty()) throw ParameterError("lattice needs at least one axis");
    if (static_cast<int>(box.lo.size()) != dim())
        throw ParameterError("lattice box/shape dimension mismatch");
    for (int d = 0; d < dim(); ++d) {
        if (shape[d] < 1) throw ParameterError("lattice shape entries must be positive");
        if (!(box.hi[d] > box.lo[d])) throw ParameterError("lattice box is degenerate");
    }
    if (!(shift >= 0.0 && shift < 1.0))
        throw ParameterError("lattice shift must lie in [0, 1)");
}

double GridFunction::sup() const {
    double s = 0.0;
    for (double v : values) s = std::max(s, v);
    return s;
}

std::size_t GridFunction::sentinel_count() const {
    std::size_t n = 0;
    for (double v : values)
        if (std::isinf(v)) ++n;
    return n;
}

GridFunction GridFunction::power(double q) const {
    GridFunction out;
    out.lattice = lattice;
    out.values.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        out.values[i] = std::pow(values[i], q);
    return out;
}

GridDensity GridFunction::to_density() const {
    if (!lattice.uniform_step())
        throw ParameterError("field to density: lattice step must be uniform");
    for (double v : values)
        if (!std::isfinite(v))
            throw ParameterError("field to density: non-finite nodal value");
    GridDensity g;
    const int n = lattice.dim();
    const double h = lattice.step(0);
    g.spacing = h;
    g.shape = lattice.shape;
    g.origin.resize(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d)
        g.origin[d] = lattice.box.lo[d] + (lattice.shift - 0.5) * h;
    g.values = values;
    return g;
}

void GridFunction::write_csv(std::ostream& out) const {
    const int n = lattice.dim();
    for (int d = 0; d < n; ++d) out << 'x' << (d + 1) << ',';
    out << "value\n";
    std::vector<double> pt(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < values.size(); ++i) {
        lattice.node(i, pt.data());
        for (int d = 0; d < n; ++d) out << format_num(pt[d]) << ',';
        out << format_num(values[i]) << "\n";
    }
}

GridFunction wolff_field(const DiscreteMeasure& m, const PotentialParams& p,
                         const QuadratureRule& q, const Lattice& lattice,
                         int threads) {
    lattice.validate();
    if (lattice.dim() != p.dim) throw ParameterError("lattice/potential dimension mismatch");
    Shared sh = prepare(m, p, q);
    GridFunction out;
    out.lattice = lattice;
    out.values.assign(lattice.node_count(), 0.0);
    parallel_for(out.values.size(), threads, [&](std::size_t b, std::size_t e) {
        Scratch sc;
        std::vector<double> pt(static_cast<std::size_t>(lattice.dim()));
        for (std::size_t i = b; i < e; ++i) {
            lattice.node(i, pt.data());
            out.values[i] = eval_point(sh, pt, sc);
        }
    });
    return out;
}

std::vector<double> wolff_at(const DiscreteMeasure& m, const PotentialParams& p,
                             const QuadratureRule& q,
                             const std::vector<Point>& points, int threads) {
    Shared sh = prepare(m, p, q);
    std::vector<double> out(points.size(), 0.0);
    parallel_for(points.size(), threads, [&](std::size_t b, std::size_t e) {
        Scratch sc;
        for (std::size_t i = b; i < e; ++i) out[i] = eval_point(sh, points[i], sc);
    });
    return out;
}

// --------- maximal function ---------

double maximal_function(const DiscreteMeasure& omega,
                        const std::function<double(std::span<const double>)>& f,
                        std::span<const double> x) {
    if (static_cast<int>(x.size()) != omega.dim)
        throw ParameterError("maximal function: point dimension mismatch");
    // Support points with their masses and |f| values, atoms first then cells,
    // mirroring the mass-query order.
    std::vector<double> d2s, masses, fvals;
    for (std::size_t i = 0; i < omega.atom_count(); ++i) {
        if (omega.atom_weights[i] <= 0.0) continue;
        d2s.push_back(squared_distance(omega.atom(i), x));
        masses.push_back(omega.atom_weights[i]);
        fvals.push_back(std::abs(f(omega.atom(i))));
    }
    if (omega.density) {
        const GridDensity& g = *omega.density;
        const double cv = g.cell_volume();
        std::vector<double> center(g.dim());
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            if (g.values[c] <= 0.0) continue;
            g.cell_center(c, center.data());
            d2s.push_back(squared_distance(center, x));
            masses.push_back(g.values[c] * cv);
            fvals.push_back(std::abs(f(center)));
        }
    }
    if (d2s.empty())
        throw DataError("maximal function: measure has no mass");

    std::vector<double> radii(d2s);
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    // The average is piecewise constant in r and only changes at support
    // distances, so sweeping those radii is the exact supremum.  Sums are
    // recomputed from scratch per radius in support order.
    double best = 0.0;
    for (double r2 : radii) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < d2s.size(); ++i) {
            if (d2s[i] <= r2) {
                num += masses[i] * fvals[i];
                den += masses[i];
            }
        }
        if (den > 0.0) best = std::max(best, num / den);
    }
    return best;
}

}  // namespace wolffkit
