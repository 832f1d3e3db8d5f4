#include "wolffkit/system.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

namespace wolffkit {

// --------- operator parameterization ---------

PotentialParams hessian_params(int k, int dim) {
    if (k < 1) throw ParameterError("hessian order must be at least 1");
    PotentialParams p;
    p.dim = dim;
    p.alpha = 2.0 * k / (k + 1.0);
    p.beta = k + 1.0;
    return p;
}

double SystemSpec::alpha() const {
    return op == OperatorKind::p_laplace ? 1.0 : 2.0 * k / (k + 1.0);
}

double SystemSpec::beta() const {
    return op == OperatorKind::p_laplace ? p : k + 1.0;
}

PotentialParams SystemSpec::potential() const {
    PotentialParams pp;
    pp.dim = dim;
    pp.alpha = alpha();
    pp.beta = beta();
    if (!whole_space) pp.trunc = Truncation::fixed(2.0 * domain.diameter());
    return pp;
}

void SystemSpec::validate() const {
    if (dim < 1 || dim > 3) throw ParameterError("system dimension must be 1..3");
    const double base = op == OperatorKind::p_laplace ? p - 1.0 : static_cast<double>(k);
    if (op == OperatorKind::p_laplace) {
        if (!(p > 1.0) || !(p < static_cast<double>(dim)))
            throw ParameterError("p-laplace system needs 1 < p < N");
    } else {
        if (k < 1) throw ParameterError("hessian order must be at least 1");
        if (!(2 * k < dim)) throw ParameterError("hessian system needs 2k < N");
    }
    if (!(q1 > 0.0) || !(q2 > 0.0))
        throw ParameterError("system exponents must be positive");
    if (!(q1 * q2 > base * base))
        throw ParameterError("system exponents must satisfy q1*q2 > (p-1)^2 (resp. k^2)");
    if (!(c_star > 0.0) || !(c71 > 0.0))
        throw ParameterError("system constants must be positive");
    if (domain.dim() != dim) throw ParameterError("system domain dimension mismatch");
    if (!mu.empty() && mu.dim != dim) throw ParameterError("mu dimension mismatch");
    if (!eta.empty() && eta.dim != dim) throw ParameterError("eta dimension mismatch");
    potential().validate();
}

// --------- iteration constants ---------

IterationConstants IterationConstants::compute(const SystemSpec& spec) {
    const double b = spec.beta() - 1.0;
    const double q = spec.q1;
    const double s = spec.q2;
    IterationConstants c;
    c.c68 = spec.c_star * std::pow(2.0, 1.0 / b);
    c.c69 = spec.c_star * std::pow(2.0, 1.0 + 1.0 / b) *
            std::pow(std::pow(c.c68, s) * std::pow(2.0, s - 1.0) + 1.0, 1.0 / b);
    c.c70 = spec.c_star * std::pow(2.0, 1.0 / b) * std::pow(c.c69, q / b);
    const double lead = spec.c_star * std::pow(2.0, 1.0 / b) *
                        std::pow(std::pow(c.c70, s) * std::pow(2.0, s - 1.0), 1.0 / b) *
                        spec.c71;
    c.m_star = std::pow(c.c69 / (2.0 * lead), b * b * b / (q * s));
    return c;
}

// --------- picard iteration ---------

namespace {

GridFunction zero_field(const Lattice& lat) {
    GridFunction f;
    f.lattice = lat;
    f.values.assign(lat.node_count(), 0.0);
    return f;
}

// c_scale * W[m] over the lattice; zero measures shortcut to the exact zero
// field, and a sentinel anywhere means a node sits on an atom.
GridFunction scaled_field(const DiscreteMeasure& m, const PotentialParams& p,
                          const QuadratureRule& q, const Lattice& lat, double c_scale,
                          int threads) {
    if (m.total_mass() == 0.0) return zero_field(lat);
    GridFunction f = wolff_field(m, p, q, lat, threads);
    if (f.sentinel_count() > 0)
        throw DataError("a lattice node sits on a data atom; offset the lattice");
    if (c_scale != 1.0)
        for (double& v : f.values) v *= c_scale;
    return f;
}

// f^expo dx + data as one measure on the lattice geometry.
DiscreteMeasure assemble_measure(const GridFunction& f, double expo,
                                 const DiscreteMeasure& data, int dim) {
    DiscreteMeasure m;
    m.dim = dim;
    GridDensity g = f.power(expo).to_density();
    if (g.total_mass() > 0.0) m.density = std::move(g);
    for (std::size_t i = 0; i < data.atom_count(); ++i)
        m.add_atom(data.atom(i), data.atom_weights[i]);
    if (data.density) {
        if (!m.density) {
            m.density = data.density;
        } else {
            GridDensity& mine = *m.density;
            const GridDensity& theirs = *data.density;
            if (mine.origin != theirs.origin || mine.spacing != theirs.spacing ||
                mine.shape != theirs.shape)
                throw DataError("data density must live on the evaluation lattice");
            for (std::size_t i = 0; i < mine.values.size(); ++i)
                mine.values[i] += theirs.values[i];
        }
    }
    m.canonicalize();
    return m;
}

struct BoundFields {
    GridFunction u;  // c70 W[(W[omega])^q1] + c68 W[mu]
    GridFunction v;  // c69 W[omega]
};

BoundFields bound_fields(const SystemSpec& spec, const PotentialParams& pp,
                         const QuadratureRule& rule, const Lattice& lat,
                         const IterationConstants& c, int threads) {
    const GridFunction w_mu = scaled_field(spec.mu, pp, rule, lat, 1.0, threads);
    const DiscreteMeasure omega = assemble_measure(w_mu, spec.q2, spec.eta, spec.dim);
    const GridFunction w_omega = scaled_field(omega, pp, rule, lat, 1.0, threads);
    DiscreteMeasure none;
    none.dim = spec.dim;
    const DiscreteMeasure inner = assemble_measure(w_omega, spec.q1, none, spec.dim);
    BoundFields b;
    b.v = w_omega;
    for (double& v : b.v.values) v *= c.c69;
    b.u = scaled_field(inner, pp, rule, lat, c.c70, threads);
    for (std::size_t i = 0; i < b.u.values.size(); ++i)
        b.u.values[i] += c.c68 * w_mu.values[i];
    return b;
}

// max nodewise iterate/bound; 0/0 pairs are skipped.
void check_bound(const GridFunction& it, const GridFunction& bound, IterationState& st) {
    for (std::size_t i = 0; i < it.values.size(); ++i) {
        const double a = it.values[i];
        const double b = bound.values[i];
        if (a == 0.0) continue;
        const double ratio = b > 0.0 ? a / b : kInfinity;
        st.bound_margin = std::max(st.bound_margin, ratio);
        if (a > b * (1.0 + 1e-9)) st.bound_ok = false;
    }
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

bool nodewise_geq(const GridFunction& a, const GridFunction& b) {
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (a.values[i] < b.values[i]) return false;
    return true;
}

}  // namespace

IterationRun picard_iterate(const SystemSpec& spec, const Lattice& lattice,
                            const IterateOptions& opts) {
    spec.validate();
    lattice.validate();
    if (lattice.dim() != spec.dim)
        throw ParameterError("iteration lattice dimension mismatch");
    if (opts.max_m < 1) throw ParameterError("iteration needs max_m >= 1");
    const PotentialParams pp = spec.potential();

    IterationRun run;
    run.constants = IterationConstants::compute(spec);
    const BoundFields bounds =
        bound_fields(spec, pp, opts.rule, lattice, run.constants, opts.threads);

    IterationState st;
    st.u = zero_field(lattice);
    st.v = zero_field(lattice);
    st.increment = kInfinity;
    run.states.push_back(st);

    for (int m = 1; m <= opts.max_m; ++m) {
        const IterationState& prev = run.states.back();
        IterationState next;
        next.m = m;
        next.u = scaled_field(assemble_measure(prev.v, spec.q1, spec.mu, spec.dim), pp,
                              opts.rule, lattice, spec.c_star, opts.threads);
        next.v = scaled_field(assemble_measure(prev.u, spec.q2, spec.eta, spec.dim), pp,
                              opts.rule, lattice, spec.c_star, opts.threads);
        next.sup_u = next.u.sup();
        next.sup_v = next.v.sup();
        next.increment = std::max(max_abs_diff(next.u, prev.u), max_abs_diff(next.v, prev.v));
        if (opts.monotone_mode)
            next.monotone = nodewise_geq(next.u, prev.u) && nodewise_geq(next.v, prev.v);
        check_bound(next.u, bounds.u, next);
        check_bound(next.v, bounds.v, next);
        run.states.push_back(next);
        if (!next.bound_ok || next.sup_u > opts.ceiling || next.sup_v > opts.ceiling) {
            run.diverged = true;
            break;
        }
        if (next.increment < opts.tol_conv) {
            run.converged = true;
            break;
        }
    }

    if (run.converged) {
        const IterationState& fin = run.last();
        const GridFunction ru =
            scaled_field(assemble_measure(fin.v, spec.q1, spec.mu, spec.dim), pp, opts.rule,
                         lattice, spec.c_star, opts.threads);
        const GridFunction rv =
            scaled_field(assemble_measure(fin.u, spec.q2, spec.eta, spec.dim), pp, opts.rule,
                         lattice, spec.c_star, opts.threads);
        run.residual_u = fin.sup_u > 0.0 ? max_abs_diff(fin.u, ru) / fin.sup_u : 0.0;
        run.residual_v = fin.sup_v > 0.0 ? max_abs_diff(fin.v, rv) / fin.sup_v : 0.0;
    }
    return run;
}

void IterationRun::write_csv(std::ostream& out) const {
    out << "m,sup_u,sup_v,increment,bound_margin\n";
    for (const IterationState& st : states)
        out << st.m << ',' << format_num(st.sup_u) << ',' << format_num(st.sup_v) << ','
            << format_num(st.increment) << ',' << format_num(st.bound_margin) << '\n';
    out << "# c68=" << format_num(constants.c68) << " c69=" << format_num(constants.c69)
        << " c70=" << format_num(constants.c70) << " m_star=" << format_num(constants.m_star)
        << '\n';
    out << "# converged=" << (converged ? 1 : 0) << " diverged=" << (diverged ? 1 : 0)
        << '\n';
    out << "# residual_u=" << format_num(residual_u) << " residual_v=" << format_num(residual_v)
        << '\n';
    out << "# monotone=" << (states.back().monotone ? 1 : 0) << " bound_ok="
        << (states.back().bound_ok ? 1 : 0) << '\n';
}

BoundReport solution_bounds(const SystemSpec& spec, const Lattice& lattice,
                            const IterationState& state, const IterateOptions& opts,
                            double constant_scale) {
    spec.validate();
    if (!(constant_scale > 0.0))
        throw ParameterError("bound constant scale must be positive");
    IterationConstants c = IterationConstants::compute(spec);
    c.c68 *= constant_scale;
    c.c69 *= constant_scale;
    c.c70 *= constant_scale;
    const BoundFields bounds =
        bound_fields(spec, spec.potential(), opts.rule, lattice, c, opts.threads);
    BoundReport rep;
    IterationState probe;
    check_bound(state.u, bounds.u, probe);
    rep.u_ratio = probe.bound_margin;
    const bool u_ok = probe.bound_ok;
    probe = IterationState{};
    check_bound(state.v, bounds.v, probe);
    rep.v_ratio = probe.bound_margin;
    rep.passed = u_ok && probe.bound_ok;
    return rep;
}

// --------- exponent regions ---------

bool liouville_check(const SystemSpec& spec) {
    double base, lead;
    if (spec.op == OperatorKind::p_laplace) {
        if (!(spec.p > 1.0)) throw ParameterError("liouville check needs p > 1");
        base = spec.p - 1.0;
        lead = spec.p;
    } else {
        if (spec.k < 1) throw ParameterError("liouville check needs k >= 1");
        base = static_cast<double>(spec.k);
        lead = 2.0 * spec.k;
    }
    if (!(spec.q1 > 0.0) || !(spec.q2 > 0.0))
        throw ParameterError("liouville check needs positive exponents");
    const double prod = spec.q1 * spec.q2;
    if (!(prod > base * base))
        throw ParameterError("liouville check needs q1*q2 > (p-1)^2 (resp. k^2)");
    const double mx = std::max(spec.q1, spec.q2);
    return lead * (prod + base * mx) / (prod - base * base) >= static_cast<double>(spec.dim);
}

bool subcritical_check(const SystemSpec& spec) {
    const double n = static_cast<double>(spec.dim);
    if (spec.op == OperatorKind::p_laplace) {
        if (!(spec.p > 1.0) || !(spec.p < n))
            throw ParameterError("subcritical check needs 1 < p < N");
        return spec.q1 < n * (spec.p - 1.0) / (n - spec.p);
    }
    if (spec.k < 1 || !(2 * spec.k < spec.dim))
        throw ParameterError("subcritical check needs 1 <= k and 2k < N");
    if (!spec.whole_space && spec.q1 < static_cast<double>(spec.k)) return false;
    if (!(spec.q1 > 0.0)) return false;
    return spec.q1 < n * spec.k / (n - 2.0 * spec.k);
}

double corollary_d_majorant(double a, const Point& x0, double p, int dim, double R,
                            const Point& x) {
    if (!(p > 1.0) || !(p < static_cast<double>(dim)))
        throw ParameterError("majorant needs 1 < p < N");
    if (!(a >= 0.0)) throw ParameterError("majorant needs a >= 0");
    if (!(R > 0.0)) throw ParameterError("majorant needs R > 0");
    if (x0.size() != static_cast<std::size_t>(dim) || x.size() != static_cast<std::size_t>(dim))
        throw ParameterError("majorant point dimension mismatch");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - x0[i]) * (x[i] - x0[i]);
    const double dist = std::sqrt(d2);
    if (dist >= R) return 0.0;
    const double expo = (static_cast<double>(dim) - p) / (p - 1.0);
    if (dist == 0.0) return kInfinity;
    const double tail = std::isinf(R) ? 0.0 : std::pow(R, -expo);
    const double head = std::pow(dist, -expo);
    return std::pow(a, 1.0 / (p - 1.0)) * std::max(head - tail, 0.0);
}

// --------- run configuration ---------

Lattice RunConfig::lattice() const {
    Lattice lat;
    lat.box = spec.domain;
    lat.shape.assign(static_cast<std::size_t>(spec.dim), grid);
    lat.shift = shift;
    return lat;
}

IterateOptions RunConfig::options() const {
    IterateOptions opts;
    opts.max_m = max_m;
    opts.monotone_mode = monotone_mode;
    opts.tol_conv = tol_conv;
    opts.rule.nodes = nodes;
    opts.threads = threads;
    return opts;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (trim(s.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ParameterError("run config: bad numeric value for " + key);
}

int parse_int(const std::string& key, const std::string& s) {
    const double v = parse_real(key, s);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ParameterError("run config: " + key + " must be an integer");
    return i;
}

std::vector<double> parse_reals(const std::string& key, const std::string& s) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) {
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        if (!tok.empty()) out.push_back(parse_real(key, tok));
    }
    if (out.empty()) throw ParameterError("run config: empty value for " + key);
    return out;
}

}  // namespace

RunConfig parse_run_config(std::istream& in) {
    RunConfig cfg;
    std::vector<double> box_lo, box_hi;
    bool dim_given = false;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParameterError("run config: expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "operator") {
            if (val == "p-laplace") cfg.spec.op = OperatorKind::p_laplace;
            else if (val == "k-hessian") cfg.spec.op = OperatorKind::k_hessian;
            else throw ParameterError("run config: unknown operator '" + val + "'");
        } else if (key == "p") {
            cfg.spec.p = parse_real(key, val);
        } else if (key == "k") {
            cfg.spec.k = parse_int(key, val);
        } else if (key == "q1" || key == "s1") {
            cfg.spec.q1 = parse_real(key, val);
        } else if (key == "q2" || key == "s2") {
            cfg.spec.q2 = parse_real(key, val);
        } else if (key == "dim") {
            cfg.spec.dim = parse_int(key, val);
            dim_given = true;
        } else if (key == "c_star") {
            cfg.spec.c_star = parse_real(key, val);
        } else if (key == "c71") {
            cfg.spec.c71 = parse_real(key, val);
        } else if (key == "domain") {
            if (val == "whole-space") cfg.spec.whole_space = true;
            else if (val == "box") cfg.spec.whole_space = false;
            else throw ParameterError("run config: unknown domain '" + val + "'");
        } else if (key == "box_lo") {
            box_lo = parse_reals(key, val);
        } else if (key == "box_hi") {
            box_hi = parse_reals(key, val);
        } else if (key == "grid") {
            cfg.grid = parse_int(key, val);
        } else if (key == "shift") {
            cfg.shift = parse_real(key, val);
        } else if (key == "max_m") {
            cfg.max_m = parse_int(key, val);
        } else if (key == "tol_conv") {
            cfg.tol_conv = parse_real(key, val);
        } else if (key == "mode") {
            if (val == "monotone") cfg.monotone_mode = true;
            else if (val == "plain") cfg.monotone_mode = false;
            else throw ParameterError("run config: unknown mode '" + val + "'");
        } else if (key == "nodes") {
            cfg.nodes = parse_int(key, val);
        } else if (key == "threads") {
            cfg.threads = parse_int(key, val);
        } else if (key == "mu") {
            cfg.mu_path = val;
        } else if (key == "eta") {
            cfg.eta_path = val;
        } else {
            throw ParameterError("run config: unknown key '" + key + "'");
        }
    }
    if (box_lo.empty() != box_hi.empty())
        throw ParameterError("run config: box_lo and box_hi must come together");
    if (!box_lo.empty()) {
        if (box_lo.size() != box_hi.size() ||
            box_lo.size() != static_cast<std::size_t>(cfg.spec.dim))
            throw ParameterError("run config: box extents must have dim entries");
        Box b;
        b.lo = box_lo;
        b.hi = box_hi;
        cfg.spec.domain = b;
    } else if (dim_given) {
        cfg.spec.domain = Box::cube(cfg.spec.dim, -0.5, 0.5);
    }
    return cfg;
}

}  // namespace wolffkit
