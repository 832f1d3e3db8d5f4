#include "wolffkit/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

namespace wolffkit {

void CapacityParams::validate() const {
    if (!(alpha > 0.0)) throw ParameterError("capacity kernel order must be positive");
    if (!(s > 1.0)) throw ParameterError("capacity exponent s must exceed 1");
    if (!(bessel_scale > 0.0)) throw ParameterError("truncation scale must be positive");
}

bool capacity_zero_test(const CapacityParams& p, int dim) {
    p.validate();
    if (dim < 1) throw ParameterError("dimension must be positive");
    if (p.kind != CapacityKind::riesz) return false;
    return p.alpha >= static_cast<double>(dim);
}

bool point_capacity_positive(const CapacityParams& p, int dim) {
    p.validate();
    if (dim < 1) throw ParameterError("dimension must be positive");
    if (p.kind != CapacityKind::bessel)
        throw ParameterError("point capacity test needs the truncated kernel kind");
    return p.alpha > static_cast<double>(dim);
}

// --------- discretized program ---------

namespace {

// One assembled instance of  min sum w_i f_i^s  s.t.  (A f)_j >= 1, f >= 0,
// with the weight and volume factors folded into both w and A.
struct Program {
    std::vector<double> w;                  // rho_i * vol_i
    std::vector<std::vector<double>> rows;  // a_ji = k(x_j, y_i) rho_i vol_i
};

constexpr double kPi = 3.14159265358979323846;

struct SolveResult {
    double value = kInfinity;
    int iterations = 0;
    bool converged = false;
};

SolveResult solve_program(const Program& prog, double s, const SolveOptions& opts) {
    const std::size_t n = prog.w.size();
    const std::size_t c = prog.rows.size();
    if (n == 0 || c == 0) throw ParameterError("capacity program is empty");

    // Uniform start with the worst constraint at one.
    double worst = kInfinity;
    for (const auto& row : prog.rows) {
        double sum = 0.0;
        for (double a : row) sum += a;
        worst = std::min(worst, sum);
    }
    if (!(worst > 0.0)) throw ParameterError("capacity constraint rows are degenerate");
    const double f0 = 1.0 / worst;

    std::vector<double> f(n, f0), grad(n), cons(c);
    const double step0 = opts.step > 0.0 ? opts.step : 0.5 * f0;
    double base_obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) base_obj += prog.w[i] * std::pow(f0, s);
    const double penalty = opts.penalty > 0.0 ? opts.penalty : 10.0 * base_obj;

    SolveResult res;
    res.iterations = opts.iterations;
    double best_quarter_ago = kInfinity;
    const int quarter_mark = opts.iterations - std::max(1, opts.iterations / 4);

    for (int it = 1; it <= opts.iterations; ++it) {
        parallel_for(c, opts.threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t j = b; j < e; ++j) {
                const auto& row = prog.rows[j];
                double sum = 0.0;
                for (std::size_t i = 0; i < n; ++i) sum += row[i] * f[i];
                cons[j] = sum;
            }
        });
        double mn = kInfinity;
        for (double v : cons) mn = std::min(mn, v);
        if (mn > 0.0) {
            // Rescaling to exact feasibility turns every iterate into an
            // upper bound on the discrete capacity.
            double obj = 0.0;
            for (std::size_t i = 0; i < n; ++i) obj += prog.w[i] * std::pow(f[i], s);
            const double candidate = obj / std::pow(mn, s);
            if (candidate < res.value) res.value = candidate;
        }
        if (it == quarter_mark) best_quarter_ago = res.value;

        for (std::size_t i = 0; i < n; ++i)
            grad[i] = s * prog.w[i] * std::pow(f[i], s - 1.0);
        for (std::size_t j = 0; j < c; ++j) {
            if (cons[j] >= 1.0) continue;
            const auto& row = prog.rows[j];
            for (std::size_t i = 0; i < n; ++i) grad[i] -= penalty * row[i];
        }
        double gmax = 0.0;
        for (double g : grad) gmax = std::max(gmax, std::abs(g));
        if (gmax == 0.0) break;
        const double eta = step0 / static_cast<double>(it);
        for (std::size_t i = 0; i < n; ++i)
            f[i] = std::max(0.0, f[i] - eta * grad[i] / gmax);
    }
    res.converged = std::isfinite(res.value) &&
                    (best_quarter_ago == kInfinity ||
                     res.value >= (1.0 - 1e-2) * best_quarter_ago);
    if (!std::isfinite(res.value)) {
        res.value = 0.0;
        res.converged = false;
    }
    return res;
}

// --------- kernels ---------

double kernel_reach(const CapacityParams& p) {
    return p.kind == CapacityKind::bessel ? p.bessel_scale : kInfinity;
}

// Exact average of |x-y|^{A-3} over the sphere |y| = sigma at |x| = r in
// three dimensions, with the pair distance capped at the kernel reach.
double shell_kernel(double r, double sigma, double A, double reach) {
    const double lo = std::abs(r - sigma);
    if (lo >= reach) return 0.0;
    if (r == 0.0 || sigma == 0.0) {
        const double d = std::max(r, sigma);
        if (d == 0.0) return kInfinity;
        return d <= reach ? std::pow(d, A - 3.0) : 0.0;
    }
    const double hi = std::min(r + sigma, reach);
    if (std::abs(A - 1.0) < 1e-12)
        return std::log(hi / lo) / (2.0 * r * sigma);
    return (std::pow(hi, A - 1.0) - std::pow(lo, A - 1.0)) /
           (2.0 * r * sigma * (A - 1.0));
}

// Radial average of shell_kernel over sigma in [a, b], weighted by sigma^2.
double shell_kernel_averaged(double r, double a, double b, double A, double reach) {
    static const double gl_x[8] = {-0.9602898564975363, -0.7966664774136267,
                                   -0.5255324099163290, -0.1834346424956498,
                                   0.1834346424956498,  0.5255324099163290,
                                   0.7966664774136267,  0.9602898564975363};
    static const double gl_w[8] = {0.1012285362903763, 0.2223810344533745,
                                   0.3137066458778873, 0.3626837833783620,
                                   0.3626837833783620, 0.3137066458778873,
                                   0.2223810344533745, 0.1012285362903763};
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double num = 0.0, den = 0.0;
    for (int g = 0; g < 8; ++g) {
        const double sigma = mid + half * gl_x[g];
        const double wgt = gl_w[g] * sigma * sigma;
        num += wgt * shell_kernel(r, sigma, A, reach);
        den += wgt;
    }
    return num / den;
}

// --------- backends ---------

// Shells of width R*h: the resolution is relative to the ball, so programs
// at different radii are exact scaled copies of each other and the scaling
// law survives discretization.
Program radial_ball_program(const CapacityParams& p, double R, double h) {
    const int shells = std::max(8, static_cast<int>(std::lround(1.0 / h)));
    const double w = R / shells;
    Program prog;
    prog.w.resize(shells);
    std::vector<double> mids(shells);
    for (int j = 0; j < shells; ++j) {
        const double a = j * w, b = a + w;
        mids[j] = a + 0.5 * w;
        prog.w[j] = (4.0 * kPi / 3.0) * (b * b * b - a * a * a);
    }
    const double reach = kernel_reach(p);
    prog.rows.resize(static_cast<std::size_t>(shells) + 1);
    for (int i = 0; i <= shells; ++i) {
        const double r = i == 0 ? 0.0 : mids[i - 1];
        auto& row = prog.rows[static_cast<std::size_t>(i)];
        row.resize(shells);
        for (int j = 0; j < shells; ++j) {
            const bool near = std::abs(r - mids[j]) <= 1.5 * w;
            const double k = near
                ? shell_kernel_averaged(r, j * w, j * w + w, p.alpha, reach)
                : shell_kernel(r, mids[j], p.alpha, reach);
            row[j] = k * prog.w[j];
        }
    }
    return prog;
}

double unit_ball_volume(int dim) {
    switch (dim) {
        case 1: return 2.0;
        case 2: return kPi;
        case 3: return 4.0 * kPi / 3.0;
        default: throw ParameterError("lattice capacity supports dimensions 1 to 3");
    }
}

struct LatticeCells {
    std::vector<double> centers;  // flat, count * dim
    int dim = 0;
    std::size_t count() const { return centers.size() / static_cast<std::size_t>(dim); }
};

LatticeCells cover_box(const Box& b, double h) {
    LatticeCells out;
    out.dim = b.dim();
    std::vector<int> shape(static_cast<std::size_t>(out.dim));
    std::size_t total = 1;
    for (int d = 0; d < out.dim; ++d) {
        shape[d] = std::max(1, static_cast<int>(std::ceil((b.hi[d] - b.lo[d]) / h - 1e-9)));
        total *= static_cast<std::size_t>(shape[d]);
    }
    if (total > 2000000) throw ParameterError("capacity lattice too large; coarsen h");
    out.centers.reserve(total * static_cast<std::size_t>(out.dim));
    std::vector<int> idx(static_cast<std::size_t>(out.dim), 0);
    while (true) {
        for (int d = 0; d < out.dim; ++d)
            out.centers.push_back(b.lo[d] + (idx[d] + 0.5) * h);
        int d = out.dim - 1;
        while (d >= 0) {
            if (++idx[d] < shape[d]) break;
            idx[d] = 0;
            --d;
        }
        if (d < 0) break;
    }
    return out;
}

bool degenerate_last_axis(const Box& b) {
    return b.hi[b.dim() - 1] == b.lo[b.dim() - 1];
}

Program lattice_program(const CapacityParams& p, const Region& K, double h,
                        const SolveOptions& opts) {
    const bool weighted = p.kind == CapacityKind::weighted_halfspace;
    Box kbox;
    if (K.kind == Region::Kind::ball) {
        kbox.lo.resize(K.center.size());
        kbox.hi.resize(K.center.size());
        for (std::size_t d = 0; d < K.center.size(); ++d) {
            kbox.lo[d] = K.center[d] - K.radius;
            kbox.hi[d] = K.center[d] + K.radius;
        }
    } else {
        kbox = K.box;
    }
    const int dim = kbox.dim();
    const bool boundary_set = weighted && K.kind == Region::Kind::box &&
                              degenerate_last_axis(kbox);

    // Support cells: the set itself, or a slab above a boundary set.
    Box sbox = kbox;
    if (boundary_set) {
        const double diam = kbox.diameter();
        const double depth = opts.support_depth > 0.0
                                 ? opts.support_depth
                                 : std::max(0.5 * (diam > 0.0 ? diam : h), 4.0 * h);
        sbox.hi[dim - 1] = sbox.lo[dim - 1] + depth;
    }
    if (weighted && sbox.lo[dim - 1] < 0.0)
        throw ParameterError("weighted capacity needs sets in the upper half-space");

    LatticeCells cells = cover_box(sbox, h);
    const double cv = std::pow(h, dim);
    Program prog;
    std::vector<double> support;
    for (std::size_t i = 0; i < cells.count(); ++i) {
        std::span<const double> x(cells.centers.data() + i * dim, static_cast<std::size_t>(dim));
        if (!boundary_set && !K.contains(x)) continue;
        const double rho = weighted ? x[dim - 1] : 1.0;
        if (weighted && !(rho > 0.0)) continue;
        support.insert(support.end(), x.begin(), x.end());
        prog.w.push_back(rho * cv);
    }
    const std::size_t n = prog.w.size();
    if (n == 0) throw ParameterError("capacity support resolves to no cells; refine h");

    // Constraint nodes: cell centers of the set (projected to the hyperplane
    // for boundary sets).
    std::vector<double> nodes;
    if (boundary_set) {
        Box base = kbox;
        LatticeCells bcells = cover_box([&] {
            Box flat = base;
            flat.lo.pop_back();
            flat.hi.pop_back();
            return flat;
        }(), h);
        for (std::size_t i = 0; i < bcells.count(); ++i) {
            for (int d = 0; d < dim - 1; ++d)
                nodes.push_back(bcells.centers[i * (dim - 1) + d]);
            nodes.push_back(kbox.lo[dim - 1]);
        }
    } else {
        for (std::size_t i = 0; i < cells.count(); ++i) {
            std::span<const double> x(cells.centers.data() + i * dim,
                                      static_cast<std::size_t>(dim));
            if (K.contains(x)) nodes.insert(nodes.end(), x.begin(), x.end());
        }
    }
    const std::size_t c = nodes.size() / static_cast<std::size_t>(dim);
    if (c == 0) throw ParameterError("capacity set resolves to no nodes; refine h");
    if (c * n > 40000000) throw ParameterError("capacity program too large; coarsen h");

    const double reach = kernel_reach(p);
    const double re = h * std::pow(unit_ball_volume(dim), -1.0 / dim);
    const double kself = (dim / p.alpha) * std::pow(re, p.alpha - dim);
    const double A = p.alpha;
    prog.rows.assign(c, {});
    parallel_for(c, opts.threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) {
            std::span<const double> xj(nodes.data() + j * dim, static_cast<std::size_t>(dim));
            auto& row = prog.rows[j];
            row.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                std::span<const double> yi(support.data() + i * dim,
                                           static_cast<std::size_t>(dim));
                const double d2 = squared_distance(xj, yi);
                double k;
                if (d2 == 0.0) {
                    k = kself;
                } else {
                    const double d = std::sqrt(d2);
                    k = d <= reach ? std::pow(d, A - dim) : 0.0;
                }
                row[i] = k * prog.w[i];
            }
        }
    });
    return prog;
}

int region_dim(const Region& K) {
    return K.kind == Region::Kind::ball ? static_cast<int>(K.center.size())
                                        : K.box.dim();
}

// Shared assembly + solve; the public entry point checks A < N, the
// point-capacity regime (A > N, bounded kernel) comes straight here.
CapacityEstimate solve_region(const CapacityParams& p, const Region& K, double h,
                              const SolveOptions& opts) {
    const int dim = region_dim(K);
    Program prog;
    if (K.kind == Region::Kind::ball && dim == 3 &&
        p.kind != CapacityKind::weighted_halfspace) {
        prog = radial_ball_program(p, K.radius, h);
    } else {
        prog = lattice_program(p, K, h, opts);
    }
    SolveResult r = solve_program(prog, p.s, opts);
    CapacityEstimate est;
    est.value = r.value;
    est.method = CapacityMethod::variational;
    est.resolution = h;
    est.iterations = r.iterations;
    est.converged = r.converged;
    return est;
}

// --------- cache ---------

struct CacheKey {
    int dim;
    double alpha, s, h;
    bool operator<(const CacheKey& o) const {
        return std::tie(dim, alpha, s, h) < std::tie(o.dim, o.alpha, o.s, o.h);
    }
};

struct CacheLine {
    double value;
    int iterations;
    bool converged;
};

std::mutex cache_mutex;
std::map<CacheKey, CacheLine> cache_memory;
bool cache_loaded = false;

void load_cache_locked() {
    if (cache_loaded) return;
    cache_loaded = true;
    std::ifstream in(capacity_cache_path());
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        CacheKey key{};
        CacheLine val{};
        int conv = 0;
        if (ls >> key.dim >> key.alpha >> key.s >> key.h >> val.value >>
            val.iterations >> conv) {
            val.converged = conv != 0;
            cache_memory[key] = val;
        }
    }
}

}  // namespace

std::string capacity_cache_path() {
    if (const char* env = std::getenv("WOLFFKIT_CACHE"); env && *env) return env;
    return "capcache.txt";
}

CapacityEstimate capacity_variational(const CapacityParams& p, const Region& K,
                                      double h, const SolveOptions& opts) {
    p.validate();
    if (!(h > 0.0)) throw ParameterError("capacity grid spacing must be positive");
    const int dim = region_dim(K);
    if (!(p.alpha < static_cast<double>(dim)))
        throw ParameterError("variational capacity needs kernel order below the dimension");
    return solve_region(p, K, h, opts);
}

CapacityEstimate capacity_ball(const CapacityParams& p, double rho, int dim,
                               double h, const SolveOptions& opts) {
    p.validate();
    if (!(rho > 0.0)) throw ParameterError("ball radius must be positive");
    if (dim < 1) throw ParameterError("dimension must be positive");
    if (!(h > 0.0)) throw ParameterError("capacity grid spacing must be positive");
    const double N = static_cast<double>(dim);
    const double As = p.alpha * p.s;

    if (p.kind == CapacityKind::weighted_halfspace)
        throw ParameterError("ball scaling is not defined for the weighted kind");

    if (p.kind == CapacityKind::riesz && p.alpha >= N) {
        CapacityEstimate est;
        est.method = CapacityMethod::zero_criterion;
        est.value = 0.0;
        est.resolution = h;
        return est;
    }
    if (p.kind == CapacityKind::bessel) {
        if (p.alpha > N) {
            // Point-capacity regime: ball capacities flatten to the capacity
            // of the point, estimated once on a small resolvable ball.
            Region tiny = Region::make_ball(Point(static_cast<std::size_t>(dim), 0.0),
                                            4.0 * h);
            CapacityEstimate ref = solve_region(p, tiny, h, opts);
            ref.method = CapacityMethod::ball_scaling;
            ref.reference = ref.value;
            return ref;
        }
        if (rho > p.bessel_scale)
            throw ParameterError("ball scaling holds below the truncation scale only");
    }
    if (!(As < N))
        throw ParameterError("ball capacity needs kernel order times s below the dimension");

    // Unit-ball reference, cached per (N, A, s, h).
    CacheKey key{dim, p.alpha, p.s, h};
    CacheLine line{};
    bool have = false;
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        load_cache_locked();
        if (auto it = cache_memory.find(key); it != cache_memory.end()) {
            line = it->second;
            have = true;
        }
    }
    if (!have) {
        CapacityParams ref_params = p;
        ref_params.kind = CapacityKind::riesz;  // local equivalence at unit scale
        Region unit = Region::make_ball(Point(static_cast<std::size_t>(dim), 0.0), 1.0);
        CapacityEstimate ref = capacity_variational(ref_params, unit, h, opts);
        line.value = ref.value;
        line.iterations = ref.iterations;
        line.converged = ref.converged;
        std::lock_guard<std::mutex> lock(cache_mutex);
        if (auto it = cache_memory.find(key); it == cache_memory.end()) {
            cache_memory[key] = line;
            std::ofstream out(capacity_cache_path(), std::ios::app);
            if (out)
                out << dim << ' ' << format_full(p.alpha) << ' ' << format_full(p.s)
                    << ' ' << format_full(h) << ' ' << format_full(line.value) << ' '
                    << line.iterations << ' ' << (line.converged ? 1 : 0) << "\n";
        } else {
            line = cache_memory[key];
        }
    }

    CapacityEstimate est;
    est.method = CapacityMethod::ball_scaling;
    est.reference = line.value;
    est.value = std::pow(rho, N - As) * line.value;
    est.resolution = h;
    est.iterations = line.iterations;
    est.converged = line.converged;
    return est;
}

ConditionReport condition_check(const DiscreteMeasure& omega, const CapacityParams& p,
                                const std::vector<Region>& family,
                                std::optional<double> threshold, double h) {
    p.validate();
    if (family.empty()) throw ParameterError("condition check needs a nonempty family");
    BallMassIndex index(omega);
    ConditionReport rep;
    rep.threshold = threshold;
    for (const Region& e : family) {
        if (e.kind != Region::Kind::ball)
            throw ParameterError("condition check runs on ball families");
        ConditionRecord rec;
        rec.center = e.center;
        rec.radius = e.radius;
        rec.mass = index.ball_mass(e.center, e.radius);
        rec.capacity = capacity_ball(p, e.radius, static_cast<int>(e.center.size()), h).value;
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

    // Divergence along shrinking balls at a shared center: ratios that grow
    // monotonically by more than 10x across three dyadic shrinks.
    for (std::size_t i = 0; i < rep.records.size(); ++i) {
        std::vector<const ConditionRecord*> at_center;
        for (std::size_t j = 0; j < rep.records.size(); ++j)
            if (rep.records[j].center == rep.records[i].center)
                at_center.push_back(&rep.records[j]);
        if (at_center.size() < 4) continue;
        std::sort(at_center.begin(), at_center.end(),
                  [](const ConditionRecord* a, const ConditionRecord* b) {
                      return a->radius > b->radius;
                  });
        for (std::size_t k = 0; k + 3 < at_center.size(); ++k) {
            bool monotone = true;
            for (int t = 0; t < 3; ++t)
                if (!(at_center[k + t + 1]->ratio > at_center[k + t]->ratio))
                    monotone = false;
            if (monotone && at_center[k]->ratio > 0.0 &&
                at_center[k + 3]->ratio > 10.0 * at_center[k]->ratio)
                rep.diverging = true;
        }
    }
    if (threshold)
        rep.passed = !rep.mass_on_null_set && rep.max_ratio <= *threshold;
    else
        rep.passed = !rep.mass_on_null_set;
    return rep;
}

std::vector<Region> dyadic_ball_family(const DiscreteMeasure& omega, double base_radius,
                                       int levels, std::size_t max_centers) {
    if (!(base_radius > 0.0)) throw ParameterError("family base radius must be positive");
    if (levels < 1) throw ParameterError("family needs at least one level");
    if (max_centers < 1) throw ParameterError("family needs at least one center");
    std::vector<Point> centers;
    for (std::size_t i = 0; i < omega.atom_count() && centers.size() < max_centers; ++i) {
        if (omega.atom_weights[i] <= 0.0) continue;
        auto a = omega.atom(i);
        centers.emplace_back(a.begin(), a.end());
    }
    if (omega.density && centers.size() < max_centers) {
        const GridDensity& g = *omega.density;
        std::vector<std::size_t> occupied;
        for (std::size_t c = 0; c < g.cell_count(); ++c)
            if (g.values[c] > 0.0) occupied.push_back(c);
        const std::size_t want = max_centers - centers.size();
        const std::size_t stride = std::max<std::size_t>(1, occupied.size() / std::max<std::size_t>(want, 1));
        std::vector<double> ctr(g.dim());
        for (std::size_t k = 0; k < occupied.size() && centers.size() < max_centers;
             k += stride) {
            g.cell_center(occupied[k], ctr.data());
            centers.emplace_back(ctr.begin(), ctr.end());
        }
    }
    if (centers.empty()) throw DataError("family construction: measure has no mass");
    std::vector<Region> family;
    for (const Point& c : centers) {
        double r = base_radius;
        for (int j = 0; j < levels; ++j, r *= 0.5)
            family.push_back(Region::make_ball(c, r));
    }
    return family;
}

}  // namespace wolffkit
