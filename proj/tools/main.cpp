// Command line front end: every library operation as a reproducible
// experiment.  CSV on stdout or --out; summary lines prefixed '#'.
// Exit codes: 0 success, 1 check failure, 2 usage/parameter error, 3 data
// error.
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wolffkit/capacity.hpp"
#include "wolffkit/halfspace.hpp"
#include "wolffkit/inequality.hpp"
#include "wolffkit/measure.hpp"
#include "wolffkit/potential.hpp"
#include "wolffkit/suite.hpp"
#include "wolffkit/system.hpp"

#ifndef WOLFFKIT_PRESET_DIR
#define WOLFFKIT_PRESET_DIR ""
#endif

namespace {

using namespace wolffkit;
namespace fs = std::filesystem;

// --------- small helpers ---------

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::vector<double> parse_reals(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string tok = text.substr(pos, comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ParameterError("cannot parse number list: '" + text + "'");
        }
        pos = comma + 1;
    }
    return out;
}

Point parse_point(const std::string& text, int dim) {
    Point p = parse_reals(text);
    if (static_cast<int>(p.size()) != dim)
        throw ParameterError("point '" + text + "' needs " + std::to_string(dim) +
                             " coordinates");
    return p;
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw DataError("cannot open output file: " + path);
    return file;
}

DiscreteMeasure load_measure(const std::string& path) {
    return parse_measure_file(path).measure;
}

// --------- presets ---------

fs::path executable_dir() {
    std::error_code ec;
    const fs::path self = fs::read_symlink("/proc/self/exe", ec);
    if (ec) return {};
    return self.parent_path();
}

fs::path find_preset(const std::string& name) {
    std::vector<fs::path> candidates;
    candidates.emplace_back(name);
    candidates.emplace_back(name + ".cfg");
    std::vector<fs::path> dirs;
    if (const char* env = std::getenv("WOLFFKIT_PRESETS")) dirs.emplace_back(env);
    if (WOLFFKIT_PRESET_DIR[0] != '\0') dirs.emplace_back(WOLFFKIT_PRESET_DIR);
    const fs::path exe = executable_dir();
    if (!exe.empty()) dirs.push_back(exe / ".." / "share" / "wolffkit" / "presets");
    for (const fs::path& d : dirs) {
        candidates.push_back(d / name);
        candidates.push_back(d / (name + ".cfg"));
    }
    for (const fs::path& c : candidates) {
        std::error_code ec;
        if (fs::is_regular_file(c, ec)) return c;
    }
    throw ParameterError("preset not found: " + name);
}

bool is_path_key(const std::string& key) {
    static const char* keys[] = {"measure", "mu",     "eta",    "boundary",
                                 "interior", "sigma1", "sigma2", "config"};
    return std::any_of(std::begin(keys), std::end(keys),
                       [&](const char* k) { return key == k; });
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Replaces "--preset NAME" with the file's key=value pairs as --key value
// tokens.  Keys already present on the command line keep their explicit
// values; relative paths in path-valued keys resolve against the preset
// file's directory.
std::vector<std::string> expand_presets(std::vector<std::string> args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string name;
        if (args[i] == "--preset") {
            if (i + 1 >= args.size()) throw ParameterError("--preset needs a name");
            name = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
        } else if (args[i].rfind("--preset=", 0) == 0) {
            name = args[i].substr(9);
            args.erase(args.begin() + i);
        } else {
            continue;
        }
        const fs::path path = find_preset(name);
        const fs::path dir = path.parent_path();
        std::ifstream in(path);
        if (!in) throw DataError("cannot read preset: " + path.string());
        std::vector<std::string> injected;
        std::string line;
        while (std::getline(in, line)) {
            line = trim(line);
            if (line.empty() || line[0] == '#') continue;
            const std::size_t eq = line.find('=');
            std::string key = trim(eq == std::string::npos ? line : line.substr(0, eq));
            std::string value = eq == std::string::npos ? "" : trim(line.substr(eq + 1));
            if (key.empty()) throw DataError("bad preset line: " + line);
            const std::string flag = "--" + key;
            const bool user_gave =
                std::any_of(args.begin(), args.end(), [&](const std::string& a) {
                    return a == flag || a.rfind(flag + "=", 0) == 0;
                });
            if (user_gave) continue;
            if (value == "false" || value == "0") {
                // only meaningful for switches; scalar presets never use it
                continue;
            }
            if (is_path_key(key) && !value.empty() && value[0] != '/')
                value = (dir / value).string();
            injected.push_back(flag);
            if (!value.empty() && value != "true") injected.push_back(value);
        }
        args.insert(args.begin() + i, injected.begin(), injected.end());
        --i;  // rescan from the same spot; presets never nest
    }
    return args;
}

// --------- report writers ---------

std::string join_point(const Point& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ';';
        s += num(p[i]);
    }
    return s;
}

void write_condition_csv(const ConditionReport& rep, std::ostream& out) {
    out << "center,radius,mass,capacity,ratio\n";
    for (const ConditionRecord& r : rep.records) {
        out << join_point(r.center) << ',' << num(r.radius) << ',' << num(r.mass) << ','
            << num(r.capacity) << ',' << num(r.ratio) << '\n';
    }
    out << "# max_ratio=" << num(rep.max_ratio)
        << " mass_on_null_set=" << (rep.mass_on_null_set ? 1 : 0)
        << " diverging=" << (rep.diverging ? 1 : 0) << '\n';
    if (rep.threshold) out << "# threshold=" << num(*rep.threshold) << '\n';
    out << "# passed=" << (rep.passed ? 1 : 0) << '\n';
}

void write_estimate_csv(const CapacityEstimate& e, std::ostream& out) {
    const char* method = e.method == CapacityMethod::variational     ? "variational"
                         : e.method == CapacityMethod::ball_scaling ? "ball-scaling"
                                                                    : "zero-criterion";
    out << "value,method,reference,resolution,iterations,converged\n";
    out << num(e.value) << ',' << method << ','
        << (e.reference ? num(*e.reference) : std::string("")) << ',' << num(e.resolution)
        << ',' << e.iterations << ',' << (e.converged ? 1 : 0) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"computational toolkit for nonlinear potential estimates"};
    app.require_subcommand(1);
    app.footer(
        "Any subcommand accepts --preset NAME: key=value lines from the preset\n"
        "file become defaults for flags not given explicitly.  Presets are\n"
        "looked up as plain paths, under $WOLFFKIT_PRESETS, and in the\n"
        "installed share/wolffkit/presets directory.\n"
        "Exit codes: 0 ok, 1 check failed, 2 usage or parameter error, 3 bad\n"
        "data.");
    int code = 0;

    // --------- eval-wolff ---------
    struct {
        std::string measure, out = "-";
        std::vector<std::string> at;
        double alpha = 1.0, beta = 2.0, radius = 0.0, delta = 0.0;
        std::string lo, hi;
        int dim = 0, nodes = 512;
    } ew;
    {
        auto* sub = app.add_subcommand("eval-wolff", "evaluate a Wolff potential at points");
        sub->add_option("--measure", ew.measure, "measure file")->required();
        sub->add_option("--at", ew.at, "evaluation point x1,...,xN (repeatable)")->required();
        sub->add_option("--alpha", ew.alpha, "kernel parameter");
        sub->add_option("--beta", ew.beta, "nonlinearity parameter");
        sub->add_option("--N", ew.dim, "ambient dimension (default: measure's)");
        sub->add_option("--nodes", ew.nodes, "quadrature nodes");
        sub->add_option("--radius", ew.radius, "fixed truncation radius (0 = full range)");
        sub->add_option("--delta", ew.delta, "distance-adapted truncation factor");
        sub->add_option("--lo", ew.lo, "domain box lower corner (adapted truncation)");
        sub->add_option("--hi", ew.hi, "domain box upper corner (adapted truncation)");
        sub->add_option("--out", ew.out, "output CSV path ('-' = stdout)");
        sub->callback([&] {
            const DiscreteMeasure m = load_measure(ew.measure);
            const int dim = ew.dim > 0 ? ew.dim : m.dim;
            if (dim != m.dim) throw ParameterError("--N disagrees with the measure dimension");
            PotentialParams p;
            p.dim = dim;
            p.alpha = ew.alpha;
            p.beta = ew.beta;
            if (ew.delta > 0.0) {
                if (ew.lo.empty() || ew.hi.empty())
                    throw ParameterError("adapted truncation needs --lo and --hi");
                Box domain;
                domain.lo = parse_point(ew.lo, dim);
                domain.hi = parse_point(ew.hi, dim);
                p.trunc = Truncation::adapted(ew.delta, domain);
            } else if (ew.radius > 0.0) {
                p.trunc = Truncation::fixed(ew.radius);
            }
            QuadratureRule q;
            q.nodes = ew.nodes;
            std::ofstream file;
            std::ostream& out = open_output(ew.out, file);
            for (int d = 0; d < dim; ++d) out << 'x' << d + 1 << ',';
            out << "value\n";
            for (const std::string& s : ew.at) {
                const Point x = parse_point(s, dim);
                const double v = wolff(m, p, q, x);
                for (double c : x) out << num(c) << ',';
                out << num(v) << '\n';
            }
        });
    }

    // --------- eval-riesz ---------
    struct {
        std::string measure, out = "-";
        std::vector<std::string> at;
        double order = 2.0, radius = 0.0;
        int dim = 0, nodes = 512;
    } er;
    {
        auto* sub = app.add_subcommand("eval-riesz", "evaluate a Riesz potential at points");
        sub->add_option("--measure", er.measure, "measure file")->required();
        sub->add_option("--at", er.at, "evaluation point x1,...,xN (repeatable)")->required();
        sub->add_option("--order", er.order, "kernel order");
        sub->add_option("--N", er.dim, "ambient dimension (default: measure's)");
        sub->add_option("--nodes", er.nodes, "quadrature nodes");
        sub->add_option("--radius", er.radius, "fixed truncation radius (0 = full range)");
        sub->add_option("--out", er.out, "output CSV path");
        sub->callback([&] {
            const DiscreteMeasure m = load_measure(er.measure);
            const int dim = er.dim > 0 ? er.dim : m.dim;
            if (dim != m.dim) throw ParameterError("--N disagrees with the measure dimension");
            const Truncation trunc =
                er.radius > 0.0 ? Truncation::fixed(er.radius) : Truncation::full();
            QuadratureRule q;
            q.nodes = er.nodes;
            std::ofstream file;
            std::ostream& out = open_output(er.out, file);
            for (int d = 0; d < dim; ++d) out << 'x' << d + 1 << ',';
            out << "value\n";
            for (const std::string& s : er.at) {
                const Point x = parse_point(s, dim);
                const double v = riesz(m, er.order, trunc, q, x);
                for (double c : x) out << num(c) << ',';
                out << num(v) << '\n';
            }
        });
    }

    // --------- ball-mass ---------
    struct {
        std::string measure, out = "-";
        std::vector<std::string> at;
        double radius = 1.0;
    } bm;
    {
        auto* sub = app.add_subcommand("ball-mass", "measure of closed balls");
        sub->add_option("--measure", bm.measure, "measure file")->required();
        sub->add_option("--at", bm.at, "ball center (repeatable)")->required();
        sub->add_option("--radius", bm.radius, "ball radius")->required();
        sub->add_option("--out", bm.out, "output CSV path");
        sub->callback([&] {
            const DiscreteMeasure m = load_measure(bm.measure);
            const BallMassIndex index(m);
            std::ofstream file;
            std::ostream& out = open_output(bm.out, file);
            for (int d = 0; d < m.dim; ++d) out << 'x' << d + 1 << ',';
            out << "radius,mass\n";
            for (const std::string& s : bm.at) {
                const Point x = parse_point(s, m.dim);
                for (double c : x) out << num(c) << ',';
                out << num(bm.radius) << ',' << num(index.ball_mass(x, bm.radius)) << '\n';
            }
        });
    }

    // --------- capacity ---------
    struct {
        std::string kind = "riesz", out = "-";
        double alpha = 1.0, s = 2.0, bessel_scale = 1.0, h = 0.0625;
        int dim = 3, threads = 1;
        double rho = 1.0;
        std::string ball, lo, hi;
    } cap;
    {
        auto* sub = app.add_subcommand("capacity", "nonlinear capacities");
        sub->require_subcommand(1);
        const auto add_common = [&](CLI::App* s) {
            s->add_option("--alpha", cap.alpha, "kernel order");
            s->add_option("--s", cap.s, "integrability exponent");
            s->add_option("--kind", cap.kind, "kernel kind")
                ->check(CLI::IsMember({"riesz", "bessel", "weighted"}));
            s->add_option("--bessel-scale", cap.bessel_scale, "truncation of the local kernel");
            s->add_option("--N", cap.dim, "ambient dimension");
            s->add_option("--out", cap.out, "output CSV path");
        };
        const auto params = [&] {
            CapacityParams p;
            p.kind = cap.kind == "riesz"    ? CapacityKind::riesz
                     : cap.kind == "bessel" ? CapacityKind::bessel
                                            : CapacityKind::weighted_halfspace;
            p.alpha = cap.alpha;
            p.s = cap.s;
            p.bessel_scale = cap.bessel_scale;
            return p;
        };

        auto* ball = sub->add_subcommand("ball", "ball capacity via the scaling identity");
        add_common(ball);
        ball->add_option("--rho", cap.rho, "ball radius")->required();
        ball->add_option("--h", cap.h, "resolution of the reference solve");
        ball->add_option("--threads", cap.threads, "solver workers");
        ball->callback([&] {
            SolveOptions so;
            so.threads = cap.threads;
            const CapacityEstimate e = capacity_ball(params(), cap.rho, cap.dim, cap.h, so);
            std::ofstream file;
            write_estimate_csv(e, open_output(cap.out, file));
        });

        auto* var = sub->add_subcommand("variational", "direct variational solve");
        add_common(var);
        var->add_option("--ball", cap.ball, "ball region c1,...,cN,r");
        var->add_option("--lo", cap.lo, "box region lower corner");
        var->add_option("--hi", cap.hi, "box region upper corner");
        var->add_option("--h", cap.h, "lattice resolution");
        var->add_option("--threads", cap.threads, "solver workers");
        var->callback([&] {
            Region region;
            if (!cap.ball.empty()) {
                std::vector<double> v = parse_reals(cap.ball);
                if (v.size() < 2) throw ParameterError("--ball needs c1,...,cN,r");
                const double r = v.back();
                v.pop_back();
                region = Region::make_ball(v, r);
            } else if (!cap.lo.empty() && !cap.hi.empty()) {
                Box b;
                b.lo = parse_reals(cap.lo);
                b.hi = parse_reals(cap.hi);
                region = Region::make_box(b);
            } else {
                throw ParameterError("give --ball or --lo/--hi");
            }
            SolveOptions so;
            so.threads = cap.threads;
            const CapacityEstimate e = capacity_variational(params(), region, cap.h, so);
            std::ofstream file;
            write_estimate_csv(e, open_output(cap.out, file));
        });

        auto* zero = sub->add_subcommand("zero-test", "are all compacts null sets?");
        add_common(zero);
        zero->callback([&] {
            std::cout << "ZERO-CAPACITY: "
                      << (capacity_zero_test(params(), cap.dim) ? "true" : "false") << '\n';
        });

        auto* point = sub->add_subcommand("point-test", "do points carry positive capacity?");
        add_common(point);
        point->callback([&] {
            std::cout << "POINT-CAPACITY-POSITIVE: "
                      << (point_capacity_positive(params(), cap.dim) ? "true" : "false")
                      << '\n';
        });
    }

    // --------- check-liouville / check-subcritical ---------
    struct {
        std::string op = "p-laplace";
        double p = 2.0, q1 = 2.0, q2 = 2.0;
        int k = 1, dim = 3;
        bool whole_space = false;
    } sys;
    const auto make_system = [&] {
        SystemSpec s;
        s.op = sys.op == "p-laplace" ? OperatorKind::p_laplace : OperatorKind::k_hessian;
        s.p = sys.p;
        s.k = sys.k;
        s.q1 = sys.q1;
        s.q2 = sys.q2;
        s.dim = sys.dim;
        s.whole_space = sys.whole_space;
        return s;
    };
    const auto add_system_flags = [&](CLI::App* s, bool with_q2) {
        s->add_option("--op", sys.op, "operator")
            ->check(CLI::IsMember({"p-laplace", "k-hessian"}));
        s->add_option("--p", sys.p, "p-Laplacian exponent");
        s->add_option("--k", sys.k, "Hessian order");
        s->add_option("--q1", sys.q1, "first exponent")->required();
        if (with_q2) s->add_option("--q2", sys.q2, "second exponent")->required();
        s->add_option("--N", sys.dim, "ambient dimension")->required();
        s->add_flag("--whole-space", sys.whole_space, "whole-space problem");
    };
    {
        auto* sub = app.add_subcommand("check-liouville",
                                       "is the exponent pair in the trivial-solution region?");
        add_system_flags(sub, true);
        sub->callback([&] {
            std::cout << "LIOUVILLE: " << (liouville_check(make_system()) ? "true" : "false")
                      << '\n';
        });
    }
    {
        auto* sub = app.add_subcommand("check-subcritical",
                                       "is the leading exponent subcritical?");
        add_system_flags(sub, false);
        sub->callback([&] {
            std::cout << "SUBCRITICAL: "
                      << (subcritical_check(make_system()) ? "true" : "false") << '\n';
        });
    }

    // --------- iterate ---------
    struct {
        std::string config, out = "-";
        int threads = 0;
    } it;
    {
        auto* sub = app.add_subcommand("iterate", "run the fixed-point scheme from a config");
        sub->add_option("--config", it.config, "run configuration file")->required();
        sub->add_option("--threads", it.threads, "override the config's worker count");
        sub->add_option("--out", it.out, "output CSV path");
        sub->callback([&] {
            std::ifstream in(it.config);
            if (!in) throw DataError("cannot open config: " + it.config);
            RunConfig cfg = parse_run_config(in);
            const fs::path dir = fs::path(it.config).parent_path();
            const auto resolve = [&](const std::string& p) {
                return (p.empty() || p[0] == '/') ? p : (dir / p).string();
            };
            if (!cfg.mu_path.empty())
                cfg.spec.mu = load_measure(resolve(cfg.mu_path));
            if (!cfg.eta_path.empty())
                cfg.spec.eta = load_measure(resolve(cfg.eta_path));
            if (it.threads > 0) cfg.threads = it.threads;
            const IterationRun run = picard_iterate(cfg.spec, cfg.lattice(), cfg.options());
            std::ofstream file;
            run.write_csv(open_output(it.out, file));
        });
    }

    // --------- verify ---------
    auto* verify = app.add_subcommand("verify", "run an estimate checker");
    verify->require_subcommand(1);
    std::string verify_out = "-";

    const auto emit_report = [&](const InequalityReport& rep) {
        std::ofstream file;
        rep.write_csv(open_output(verify_out, file));
        if (!rep.passed) code = 1;
    };

    // hardy
    struct {
        double kappa = 1.0, gamma = 1.0, theta = 1.0, R = 1.0;
        std::string breaks, values;
    } hy;
    {
        auto* sub = verify->add_subcommand("hardy", "radial integral comparison probe");
        sub->add_option("--kappa", hy.kappa, "outer exponent");
        sub->add_option("--gamma", hy.gamma, "power of the inner integral");
        sub->add_option("--theta", hy.theta, "inner weight exponent");
        sub->add_option("--R", hy.R, "outer limit");
        sub->add_option("--breaks", hy.breaks, "step function breakpoints b1,...,bk");
        sub->add_option("--values", hy.values, "step function values v1,...,vk");
        sub->add_option("--out", verify_out, "output CSV path");
        sub->callback([&] {
            HardyProbe probe;
            probe.kappa = hy.kappa;
            probe.gamma = hy.gamma;
            probe.theta = hy.theta;
            probe.R = hy.R;
            if (!hy.breaks.empty() || !hy.values.empty()) {
                if (hy.breaks.empty() || hy.values.empty())
                    throw ParameterError("--breaks and --values go together");
                probe.h.breaks = parse_reals(hy.breaks);
                probe.h.values = parse_reals(hy.values);
            }
            emit_report(hardy_check(probe));
        });
    }

    // compose / compose-trunc
    struct {
        std::string measure, side = "both", lo, hi;
        double alpha = 1.0, beta = 2.0, q = 1.0, radius = 0.0, delta = 0.5;
        int grid = 33, nodes = 512, samples = 16, threads = 1;
        std::uint64_t seed = 7;
    } co;
    const auto compose_params = [&] {
        ComposeParams p;
        p.alpha = co.alpha;
        p.beta = co.beta;
        p.q = co.q;
        p.radius = co.radius;
        p.grid = co.grid;
        p.nodes = co.nodes;
        p.samples = co.samples;
        p.seed = co.seed;
        p.threads = co.threads;
        return p;
    };
    const auto add_compose_flags = [&](CLI::App* s) {
        s->add_option("--measure", co.measure, "measure file")->required();
        s->add_option("--alpha", co.alpha, "kernel parameter");
        s->add_option("--beta", co.beta, "nonlinearity parameter");
        s->add_option("--q", co.q, "composition exponent");
        s->add_option("--radius", co.radius, "truncation radius (0 = 2x scene diameter)");
        s->add_option("--grid", co.grid, "inner-field lattice nodes per axis");
        s->add_option("--nodes", co.nodes, "quadrature nodes");
        s->add_option("--samples", co.samples, "evaluation points");
        s->add_option("--seed", co.seed, "sample seed");
        s->add_option("--threads", co.threads, "workers");
        s->add_option("--out", verify_out, "output CSV path");
    };
    {
        auto* sub = verify->add_subcommand(
            "compose", "composed potential against the single composite potential");
        add_compose_flags(sub);
        sub->add_option("--side", co.side, "which bound to check")
            ->check(CLI::IsMember({"lower", "upper", "both"}));
        sub->callback([&] {
            const DiscreteMeasure m = load_measure(co.measure);
            std::ofstream file;
            std::ostream& out = open_output(verify_out, file);
            if (co.side != "upper") {
                const InequalityReport rep = compose_lower_check(m, compose_params());
                rep.write_csv(out);
                if (!rep.passed) code = 1;
            }
            if (co.side != "lower") {
                const InequalityReport rep = compose_upper_check(m, compose_params());
                rep.write_csv(out);
                if (!rep.passed) code = 1;
            }
        });
    }
    {
        auto* sub = verify->add_subcommand(
            "compose-trunc", "distance-adapted composition bound on a box domain");
        add_compose_flags(sub);
        sub->add_option("--delta", co.delta, "distance factor in (0,1)");
        sub->add_option("--lo", co.lo, "domain box lower corner")->required();
        sub->add_option("--hi", co.hi, "domain box upper corner")->required();
        sub->callback([&] {
            const DiscreteMeasure m = load_measure(co.measure);
            Box domain;
            domain.lo = parse_reals(co.lo);
            domain.hi = parse_reals(co.hi);
            emit_report(compose_adapted_check(m, compose_params(), domain, co.delta));
        });
    }

    // combination
    struct {
        std::string mu, eta;
        double alpha = 1.0, beta = 2.0, q = 2.0, s = 2.0, radius = 0.0, threshold = 1.0,
               h = 0.0625;
        int grid = 33, nodes = 512, samples = 8, levels = 6, dim = 3, threads = 1;
        std::uint64_t seed = 7;
    } cb;
    {
        auto* sub = verify->add_subcommand(
            "combination", "triple composition against the single potential");
        sub->add_option("--mu", cb.mu, "first data measure file");
        sub->add_option("--eta", cb.eta, "second data measure file");
        sub->add_option("--N", cb.dim, "ambient dimension when a measure is omitted");
        sub->add_option("--alpha", cb.alpha, "kernel parameter");
        sub->add_option("--beta", cb.beta, "nonlinearity parameter");
        sub->add_option("--q", cb.q, "inner exponent");
        sub->add_option("--s", cb.s, "outer exponent");
        sub->add_option("--radius", cb.radius, "truncation radius (0 = 2x scene diameter)");
        sub->add_option("--threshold", cb.threshold, "admissible mass/capacity ratio");
        sub->add_option("--grid", cb.grid, "inner-field lattice nodes per axis");
        sub->add_option("--nodes", cb.nodes, "quadrature nodes");
        sub->add_option("--samples", cb.samples, "evaluation points");
        sub->add_option("--levels", cb.levels, "dyadic family depth");
        sub->add_option("--h", cb.h, "capacity resolution");
        sub->add_option("--seed", cb.seed, "sample seed");
        sub->add_option("--threads", cb.threads, "workers");
        sub->add_option("--out", verify_out, "output CSV path");
        sub->callback([&] {
            if (cb.mu.empty() && cb.eta.empty())
                throw ParameterError("give --mu or --eta (or both)");
            DiscreteMeasure mu, eta;
            mu.dim = cb.dim;
            eta.dim = cb.dim;
            if (!cb.mu.empty()) mu = load_measure(cb.mu);
            if (!cb.eta.empty()) eta = load_measure(cb.eta);
            CombinationParams p;
            p.alpha = cb.alpha;
            p.beta = cb.beta;
            p.q = cb.q;
            p.s = cb.s;
            p.radius = cb.radius;
            p.threshold = cb.threshold;
            p.grid = cb.grid;
            p.nodes = cb.nodes;
            p.samples = cb.samples;
            p.levels = cb.levels;
            p.h = cb.h;
            p.seed = cb.seed;
            p.threads = cb.threads;
            emit_report(combination_check(mu, eta, p));
        });
    }

    // halfspace checks share a measure/params block
    struct {
        std::string interior, boundary, sigma1, sigma2;
        std::vector<std::string> at;
        double q1 = 1.0, q2 = 2.0, radius = 0.0, base_radius = 0.25, growth = 1.0,
               h = 0.0625, threshold = 0.0, alpha = 1.0, s = 2.0;
        std::string lo, hi;
        int dim = 3, grid = 25, nodes = 256, samples = 8, levels = 4, max_centers = 4,
            threads = 1;
        std::uint64_t seed = 7;
        bool with_threshold = false;
    } hs;
    const auto halfspace_measure = [&] {
        HalfspaceMeasure hm;
        hm.dim = hs.dim;
        hm.interior.dim = hs.dim;
        hm.boundary.dim = hs.dim - 1;
        if (!hs.interior.empty()) hm.interior = load_measure(hs.interior);
        if (!hs.boundary.empty()) hm.boundary = load_measure(hs.boundary);
        return hm;
    };
    const auto halfspace_params = [&] {
        HalfspaceParams p;
        p.q1 = hs.q1;
        p.q2 = hs.q2;
        p.radius = hs.radius;
        for (const std::string& s : hs.at) p.points.push_back(parse_reals(s));
        p.samples = hs.samples;
        p.grid = hs.grid;
        p.nodes = hs.nodes;
        p.levels = hs.levels;
        p.max_centers = static_cast<std::size_t>(hs.max_centers);
        p.base_radius = hs.base_radius;
        p.growth_constant = hs.growth;
        if (hs.with_threshold) p.threshold = hs.threshold;
        p.h = hs.h;
        p.seed = hs.seed;
        p.threads = hs.threads;
        return p;
    };
    const auto add_halfspace_flags = [&](CLI::App* s, bool with_q2) {
        s->add_option("--interior", hs.interior, "interior measure file");
        s->add_option("--boundary", hs.boundary, "boundary measure file");
        s->add_option("--N", hs.dim, "ambient dimension");
        s->add_option("--q1", hs.q1, "first exponent");
        if (with_q2) s->add_option("--q2", hs.q2, "second exponent");
        s->add_option("--radius", hs.radius, "shared truncation radius (0 = 2x diameter)");
        s->add_option("--at", hs.at, "explicit sample point (repeatable)");
        s->add_option("--samples", hs.samples, "drawn sample count");
        s->add_option("--grid", hs.grid, "field lattice nodes per axis");
        s->add_option("--nodes", hs.nodes, "quadrature nodes");
        s->add_option("--seed", hs.seed, "sample seed");
        s->add_option("--threads", hs.threads, "workers");
        s->add_option("--out", verify_out, "output CSV path");
    };
    {
        auto* sub = verify->add_subcommand(
            "compose-halfspace",
            "half-space Riesz composition against the matching single potential");
        add_halfspace_flags(sub, false);
        sub->callback(
            [&] { emit_report(riesz_compose_check(halfspace_measure(), halfspace_params())); });
    }
    {
        auto* sub = verify->add_subcommand(
            "weighted", "weighted potential of the composed field against the plain one");
        add_halfspace_flags(sub, true);
        sub->add_option("--levels", hs.levels, "dyadic family depth (growth hypothesis)");
        sub->add_option("--base-radius", hs.base_radius, "largest family radius");
        sub->add_option("--growth-constant", hs.growth, "admissible growth constant");
        sub->add_option("--max-centers", hs.max_centers, "family centers");
        sub->callback([&] {
            emit_report(weighted_estimate_check(halfspace_measure(), halfspace_params()));
        });
    }
    {
        auto* sub = verify->add_subcommand(
            "boundary-cap",
            "weighted half-space capacity of a flat set against the lower-dimensional one");
        sub->add_option("--alpha", hs.alpha, "kernel parameter");
        sub->add_option("--s", hs.s, "integrability exponent");
        sub->add_option("--lo", hs.lo, "base box lower corner (N-1 coordinates)")->required();
        sub->add_option("--hi", hs.hi, "base box upper corner")->required();
        sub->add_option("--h", hs.h, "lattice resolution");
        sub->add_option("--threads", hs.threads, "workers");
        sub->add_option("--out", verify_out, "output CSV path");
        sub->callback([&] {
            Box base;
            base.lo = parse_reals(hs.lo);
            base.hi = parse_reals(hs.hi);
            SolveOptions so;
            so.threads = hs.threads;
            emit_report(boundary_capacity_equiv_check(base, hs.alpha, hs.s, hs.h, so));
        });
    }
    {
        auto* sub = verify->add_subcommand(
            "trace", "boundary data against interior and boundary capacities");
        sub->add_option("--sigma1", hs.sigma1, "first boundary measure file");
        sub->add_option("--sigma2", hs.sigma2, "second boundary measure file");
        sub->add_option("--N", hs.dim, "ambient dimension");
        sub->add_option("--q1", hs.q1, "first exponent");
        sub->add_option("--q2", hs.q2, "second exponent");
        sub->add_option("--levels", hs.levels, "dyadic family depth");
        sub->add_option("--base-radius", hs.base_radius, "largest family radius");
        sub->add_option("--max-centers", hs.max_centers, "family centers");
        sub->add_option("--h", hs.h, "capacity resolution on the base ball");
        auto* thr = sub->add_option("--threshold", hs.threshold, "verdict threshold");
        sub->add_option("--threads", hs.threads, "workers");
        sub->add_option("--out", verify_out, "output CSV path");
        sub->callback([&] {
            hs.with_threshold = thr->count() > 0;
            DiscreteMeasure s1, s2;
            s1.dim = hs.dim - 1;
            s2.dim = hs.dim - 1;
            if (!hs.sigma1.empty()) s1 = load_measure(hs.sigma1);
            if (!hs.sigma2.empty()) s2 = load_measure(hs.sigma2);
            const ConditionReport rep = trace_condition_check(s1, s2, halfspace_params());
            std::ofstream file;
            write_condition_csv(rep, open_output(verify_out, file));
            if (!rep.passed) code = 1;
        });
    }

    // --------- suite ---------
    struct {
        std::string out = "-";
        int threads = 1;
    } su;
    {
        auto* sub = app.add_subcommand("suite", "run the full verification battery");
        sub->add_option("--threads", su.threads, "workers for the threaded checks");
        sub->add_option("--out", su.out, "output CSV path");
        sub->callback([&] {
            SuiteOptions opts;
            opts.threads = su.threads;
            opts.on_result = [](const CriterionResult& r) {
                std::fprintf(stderr, "[%s] %2d %-18s %6.2f s\n", r.passed ? "PASS" : "FAIL",
                             r.id, r.name.c_str(), r.seconds);
            };
            const SuiteReport rep = run_acceptance_suite(opts);
            std::ofstream file;
            rep.write_csv(open_output(su.out, file));
            if (!rep.all_passed()) code = 1;
        });
    }

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_presets(args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int cli = app.exit(e);
        return cli == 0 ? 0 : 2;
    } catch (const ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return code;
}
