#include "wolffkit/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace wolffkit {

// --------- GridDensity ---------

std::size_t GridDensity::cell_count() const {
    std::size_t n = 1;
    for (int s : shape) n *= static_cast<std::size_t>(s);
    return n;
}

double GridDensity::cell_volume() const {
    double v = 1.0;
    for (std::size_t d = 0; d < shape.size(); ++d) v *= spacing;
    return v;
}

void GridDensity::cell_center(std::size_t flat, double* out) const {
    const int n = dim();
    std::size_t rest = flat;
    for (int d = n - 1; d >= 0; --d) {
        const std::size_t extent = static_cast<std::size_t>(shape[d]);
        const std::size_t idx = rest % extent;
        rest /= extent;
        out[d] = origin[d] + (static_cast<double>(idx) + 0.5) * spacing;
    }
}

double GridDensity::total_mass() const {
    const double cv = cell_volume();
    double s = 0.0;
    for (double v : values) s += v * cv;
    return s;
}

Box GridDensity::bounding_box() const {
    Box b;
    b.lo = origin;
    b.hi = origin;
    for (int d = 0; d < dim(); ++d) b.hi[d] += spacing * shape[d];
    return b;
}

void GridDensity::validate() const {
    if (shape.empty() || dim() > 3)
        throw ParameterError("grid density supports dimensions 1 to 3");
    if (origin.size() != shape.size())
        throw ParameterError("grid density: origin/shape dimension mismatch");
    if (!(spacing > 0.0))
        throw ParameterError("grid density: spacing must be positive");
    for (int s : shape)
        if (s <= 0) throw ParameterError("grid density: shape entries must be positive");
    if (values.size() != cell_count())
        throw ParameterError("grid density: value count does not match shape");
    for (double v : values)
        if (!(v >= 0.0)) throw ParameterError("grid density: negative or NaN value");
}

// --------- DiscreteMeasure ---------

void DiscreteMeasure::add_atom(std::span<const double> x, double weight) {
    if (static_cast<int>(x.size()) != dim)
        throw ParameterError("atom dimension does not match measure dimension");
    if (!(weight >= 0.0))
        throw ParameterError("atom weights must be nonnegative");
    atom_coords.insert(atom_coords.end(), x.begin(), x.end());
    atom_weights.push_back(weight);
}

void DiscreteMeasure::canonicalize() {
    const std::size_t n = atom_count();
    if (n < 2) return;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t d = static_cast<std::size_t>(dim);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double* pa = atom_coords.data() + a * d;
        const double* pb = atom_coords.data() + b * d;
        for (std::size_t k = 0; k < d; ++k) {
            if (pa[k] != pb[k]) return pa[k] < pb[k];
        }
        return atom_weights[a] < atom_weights[b];
    });
    std::vector<double> coords(atom_coords.size());
    std::vector<double> weights(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* src = atom_coords.data() + order[i] * d;
        std::copy(src, src + d, coords.data() + i * d);
        weights[i] = atom_weights[order[i]];
    }
    atom_coords.swap(coords);
    atom_weights.swap(weights);
}

bool DiscreteMeasure::empty() const {
    if (!atom_weights.empty()) return false;
    return !density.has_value();
}

double DiscreteMeasure::total_mass() const {
    double s = 0.0;
    for (double w : atom_weights) s += w;
    if (density) s += density->total_mass();
    return s;
}

Box DiscreteMeasure::support_box() const {
    if (empty()) throw DataError("support box of an empty measure");
    bool started = false;
    Box b;
    if (density) {
        b = density->bounding_box();
        started = true;
    }
    for (std::size_t i = 0; i < atom_count(); ++i) {
        const auto a = atom(i);
        if (!started) {
            b.lo.assign(a.begin(), a.end());
            b.hi.assign(a.begin(), a.end());
            started = true;
        } else {
            for (int d = 0; d < dim; ++d) {
                b.lo[d] = std::min(b.lo[d], a[d]);
                b.hi[d] = std::max(b.hi[d], a[d]);
            }
        }
    }
    return b;
}

double DiscreteMeasure::nearest_atom_distance(std::span<const double> x) const {
    double best = kInfinity;
    for (std::size_t i = 0; i < atom_count(); ++i)
        best = std::min(best, squared_distance(atom(i), x));
    return std::isinf(best) ? best : std::sqrt(best);
}

DiscreteMeasure scale_measure(const DiscreteMeasure& m, double lambda) {
    if (!(lambda >= 0.0))
        throw ParameterError("scale_measure: factor must be nonnegative");
    DiscreteMeasure out = m;
    for (double& w : out.atom_weights) w *= lambda;
    if (out.density)
        for (double& v : out.density->values) v *= lambda;
    return out;
}

// --------- Region / restrict ---------

Region Region::make_ball(Point center, double radius) {
    if (!(radius >= 0.0)) throw ParameterError("region ball: negative radius");
    Region r;
    r.kind = Kind::ball;
    r.center = std::move(center);
    r.radius = radius;
    return r;
}

Region Region::make_box(Box b) {
    Region r;
    r.kind = Kind::box;
    r.box = std::move(b);
    return r;
}

bool Region::contains(std::span<const double> x) const {
    if (kind == Kind::ball)
        return squared_distance(center, x) <= radius * radius;
    return box.contains(x);
}

DiscreteMeasure restrict_measure(const DiscreteMeasure& m, const Region& region) {
    DiscreteMeasure out;
    out.dim = m.dim;
    for (std::size_t i = 0; i < m.atom_count(); ++i) {
        const auto a = m.atom(i);
        if (region.contains(a)) out.add_atom(a, m.atom_weights[i]);
    }
    if (m.density) {
        GridDensity g = *m.density;
        std::vector<double> center(g.dim());
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            g.cell_center(c, center.data());
            if (!region.contains(center)) g.values[c] = 0.0;
        }
        out.density = std::move(g);
    }
    return out;
}

// --------- mass queries ---------

double ball_mass_brute(const DiscreteMeasure& m, std::span<const double> x, double r) {
    if (!(r >= 0.0)) throw ParameterError("ball_mass: negative radius");
    if (static_cast<int>(x.size()) != m.dim)
        throw ParameterError("ball_mass: point dimension mismatch");
    const double r2 = r * r;
    double s = 0.0;
    for (std::size_t i = 0; i < m.atom_count(); ++i) {
        if (squared_distance(m.atom(i), x) <= r2) s += m.atom_weights[i];
    }
    if (m.density) {
        // Partial sum kept separate so the windowed scan in BallMassIndex
        // reproduces the result bit for bit.
        const GridDensity& g = *m.density;
        const double cv = g.cell_volume();
        std::vector<double> center(g.dim());
        double ds = 0.0;
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            g.cell_center(c, center.data());
            if (squared_distance(center, x) <= r2) ds += g.values[c] * cv;
        }
        s += ds;
    }
    return s;
}

BallMassIndex::BallMassIndex(const DiscreteMeasure& m) : m_(&m) {
    if (m.density) {
        m.density->validate();
        const GridDensity& g = *m.density;
        const int n = g.dim();
        // Table extents shape[d]+1; entry at (i_1..i_N) holds the mass sum
        // over all cells with index < i componentwise.
        std::vector<std::size_t> ext(static_cast<std::size_t>(n));
        for (int d = 0; d < n; ++d) ext[d] = static_cast<std::size_t>(g.shape[d]) + 1;
        prefix_stride_.assign(static_cast<std::size_t>(n), 1);
        for (int d = n - 2; d >= 0; --d)
            prefix_stride_[d] = prefix_stride_[d + 1] * ext[d + 1];
        std::size_t total = prefix_stride_[0] * ext[0];
        prefix_.assign(total, 0.0);

        const double cv = g.cell_volume();
        std::vector<std::size_t> cell_stride(static_cast<std::size_t>(n), 1);
        for (int d = n - 2; d >= 0; --d)
            cell_stride[d] = cell_stride[d + 1] * static_cast<std::size_t>(g.shape[d + 1]);
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            std::size_t rest = c;
            std::size_t at = 0;
            for (int d = 0; d < n; ++d) {
                const std::size_t idx = rest / cell_stride[d];
                rest %= cell_stride[d];
                at += (idx + 1) * prefix_stride_[d];
            }
            prefix_[at] = g.values[c] * cv;
        }
        // Running sums along each axis turn the shifted copy into prefix sums.
        for (int d = 0; d < n; ++d) {
            const std::size_t stride = prefix_stride_[d];
            const std::size_t extent = ext[d];
            for (std::size_t base = 0; base < total; ++base) {
                const std::size_t along = (base / stride) % extent;
                if (along != 0) continue;
                double run = 0.0;
                for (std::size_t k = 0; k < extent; ++k) {
                    run += prefix_[base + k * stride];
                    prefix_[base + k * stride] = run;
                }
            }
        }
    }
}

double BallMassIndex::ball_mass(std::span<const double> x, double r) const {
    if (!(r >= 0.0)) throw ParameterError("ball_mass: negative radius");
    const DiscreteMeasure& m = *m_;
    if (static_cast<int>(x.size()) != m.dim)
        throw ParameterError("ball_mass: point dimension mismatch");
    const double r2 = r * r;
    double s = 0.0;
    // Atoms are sorted lexicographically, so the first coordinate slab
    // [x_1 - r, x_1 + r] is a contiguous index range; scanning it in order
    // reproduces the brute-force summation order over the included atoms.
    const std::size_t n = m.atom_count();
    if (n > 0) {
        const std::size_t d = static_cast<std::size_t>(m.dim);
        const double* coords = m.atom_coords.data();
        std::size_t lo = 0, hi = n;
        {
            std::size_t a = 0, b = n;
            const double key = x[0] - r;
            while (a < b) {
                const std::size_t mid = (a + b) / 2;
                if (coords[mid * d] < key) a = mid + 1; else b = mid;
            }
            lo = a;
            a = lo; b = n;
            const double key2 = x[0] + r;
            while (a < b) {
                const std::size_t mid = (a + b) / 2;
                if (coords[mid * d] <= key2) a = mid + 1; else b = mid;
            }
            hi = a;
        }
        for (std::size_t i = lo; i < hi; ++i) {
            if (squared_distance(m.atom(i), x) <= r2) s += m.atom_weights[i];
        }
    }
    if (m.density) s += density_ball_mass(x, r);
    return s;
}

double BallMassIndex::density_ball_mass(std::span<const double> x, double r) const {
    const GridDensity& g = *m_->density;
    const int n = g.dim();
    const double r2 = r * r;
    const double cv = g.cell_volume();
    // Per-axis index windows, widened by one cell so that float rounding in
    // the window arithmetic can never drop a boundary cell; the exact
    // squared-distance test below decides membership.
    std::vector<long> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) {
        const double a = (x[d] - r - g.origin[d]) / g.spacing - 0.5;
        const double b = (x[d] + r - g.origin[d]) / g.spacing - 0.5;
        long la = static_cast<long>(std::ceil(a)) - 1;
        long lb = static_cast<long>(std::floor(b)) + 1;
        la = std::max(la, 0L);
        lb = std::min(lb, static_cast<long>(g.shape[d]) - 1);
        if (la > lb) return 0.0;
        lo[d] = la;
        hi[d] = lb;
    }
    std::vector<long> idx(lo);
    std::vector<double> center(static_cast<std::size_t>(n));
    std::vector<std::size_t> cell_stride(static_cast<std::size_t>(n), 1);
    for (int d = n - 2; d >= 0; --d)
        cell_stride[d] = cell_stride[d + 1] * static_cast<std::size_t>(g.shape[d + 1]);
    double s = 0.0;
    while (true) {
        std::size_t flat = 0;
        for (int d = 0; d < n; ++d) {
            flat += static_cast<std::size_t>(idx[d]) * cell_stride[d];
            center[d] = g.origin[d] + (static_cast<double>(idx[d]) + 0.5) * g.spacing;
        }
        if (squared_distance(center, x) <= r2) s += g.values[flat] * cv;
        int d = n - 1;
        while (d >= 0) {
            if (++idx[d] <= hi[d]) break;
            idx[d] = lo[d];
            --d;
        }
        if (d < 0) break;
    }
    return s;
}

double BallMassIndex::box_mass(const Box& b) const {
    const DiscreteMeasure& m = *m_;
    if (b.dim() != m.dim) throw ParameterError("box_mass: box dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < m.atom_count(); ++i)
        if (b.contains(m.atom(i))) s += m.atom_weights[i];
    if (m.density) s += density_box_mass(b);
    return s;
}

double BallMassIndex::density_box_mass(const Box& b) const {
    const GridDensity& g = *m_->density;
    const int n = g.dim();
    // Cell-center rule: cell i is inside iff its center lies in the closed
    // box, i.e. i in [ceil((lo-o)/h - 1/2), floor((hi-o)/h - 1/2)].
    std::vector<long> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) {
        long la = static_cast<long>(std::ceil((b.lo[d] - g.origin[d]) / g.spacing - 0.5));
        long lb = static_cast<long>(std::floor((b.hi[d] - g.origin[d]) / g.spacing - 0.5));
        la = std::max(la, 0L);
        lb = std::min(lb, static_cast<long>(g.shape[d]) - 1);
        if (la > lb) return 0.0;
        lo[d] = la;
        hi[d] = lb + 1;  // exclusive
    }
    // Inclusion-exclusion over the 2^N corners of the prefix table.
    double s = 0.0;
    const unsigned corners = 1u << n;
    for (unsigned mask = 0; mask < corners; ++mask) {
        std::size_t at = 0;
        int low_picks = 0;
        for (int d = 0; d < n; ++d) {
            const bool pick_lo = (mask >> d) & 1u;
            const long c = pick_lo ? lo[d] : hi[d];
            if (pick_lo) ++low_picks;
            at += static_cast<std::size_t>(c) * prefix_stride_[d];
        }
        const double sign = (low_picks % 2 == 0) ? 1.0 : -1.0;
        s += sign * prefix_[at];
    }
    return s;
}

// --------- file format ---------

namespace {

std::vector<double> parse_csv_doubles(const std::string& text, const char* what, int line_no) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw DataError("measure file line " + std::to_string(line_no) + ": bad " + what + " '" + cell + "'");
        }
    }
    return out;
}

double parse_one(const std::string& tok, const char* what, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw DataError("measure file line " + std::to_string(line_no) + ": bad " + what + " '" + tok + "'");
    }
}

}  // namespace

MeasureFile parse_measure(std::istream& in) {
    MeasureFile mf;
    DiscreteMeasure& m = mf.measure;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    bool reading_density = false;
    std::size_t density_needed = 0;

    while (std::getline(in, line)) {
        ++line_no;
        std::stringstream ss(line);
        std::string tok;
        if (!(ss >> tok)) continue;
        if (tok[0] == '#') continue;

        if (!have_header) {
            if (tok != "measure")
                throw DataError("measure file line " + std::to_string(line_no) + ": expected 'measure N=<dim>'");
            std::string dim_tok;
            if (!(ss >> dim_tok) || dim_tok.rfind("N=", 0) != 0)
                throw DataError("measure file line " + std::to_string(line_no) + ": expected 'N=<dim>'");
            const double dv = parse_one(dim_tok.substr(2), "dimension", line_no);
            if (dv < 1 || dv != std::floor(dv) || dv > 16)
                throw DataError("measure file line " + std::to_string(line_no) + ": dimension out of range");
            m.dim = static_cast<int>(dv);
            std::string flag;
            while (ss >> flag) {
                if (flag == "boundary") mf.boundary = true;
                else throw DataError("measure file line " + std::to_string(line_no) + ": unknown header flag '" + flag + "'");
            }
            have_header = true;
            continue;
        }

        if (reading_density) {
            GridDensity& g = *m.density;
            // Values continue until the declared cell count is filled.
            std::string first = tok;
            do {
                g.values.push_back(parse_one(first, "density value", line_no));
                if (g.values.back() < 0.0)
                    throw DataError("measure file line " + std::to_string(line_no) + ": negative density value");
            } while (g.values.size() < density_needed && (ss >> first));
            if (g.values.size() == density_needed) reading_density = false;
            continue;
        }

        if (tok == "atom") {
            std::vector<double> nums;
            std::string t;
            while (ss >> t) nums.push_back(parse_one(t, "atom entry", line_no));
            if (nums.size() != static_cast<std::size_t>(m.dim) + 1)
                throw DataError("measure file line " + std::to_string(line_no) + ": atom needs " + std::to_string(m.dim) + " coordinates and a weight");
            const double w = nums.back();
            if (w < 0.0)
                throw DataError("measure file line " + std::to_string(line_no) + ": negative atom weight");
            nums.pop_back();
            m.add_atom(nums, w);
        } else if (tok == "density") {
            if (m.density)
                throw DataError("measure file line " + std::to_string(line_no) + ": duplicate density block");
            GridDensity g;
            std::string t;
            while (ss >> t) {
                if (t.rfind("origin=", 0) == 0) {
                    g.origin = parse_csv_doubles(t.substr(7), "origin", line_no);
                } else if (t.rfind("h=", 0) == 0) {
                    g.spacing = parse_one(t.substr(2), "spacing", line_no);
                } else if (t.rfind("shape=", 0) == 0) {
                    for (double v : parse_csv_doubles(t.substr(6), "shape", line_no)) {
                        if (v < 1 || v != std::floor(v))
                            throw DataError("measure file line " + std::to_string(line_no) + ": bad shape entry");
                        g.shape.push_back(static_cast<int>(v));
                    }
                } else {
                    throw DataError("measure file line " + std::to_string(line_no) + ": unknown density field '" + t + "'");
                }
            }
            if (static_cast<int>(g.shape.size()) != m.dim || static_cast<int>(g.origin.size()) != m.dim)
                throw DataError("measure file line " + std::to_string(line_no) + ": density origin/shape must have " + std::to_string(m.dim) + " entries");
            if (!(g.spacing > 0.0))
                throw DataError("measure file line " + std::to_string(line_no) + ": density spacing must be positive");
            m.density = std::move(g);
            density_needed = m.density->cell_count();
            reading_density = density_needed > 0;
        } else {
            throw DataError("measure file line " + std::to_string(line_no) + ": unknown directive '" + tok + "'");
        }
    }
    if (!have_header) throw DataError("measure file: missing 'measure N=<dim>' header");
    if (reading_density)
        throw DataError("measure file: density block ended before " + std::to_string(density_needed) + " values were read");
    if (m.density) {
        try {
            m.density->validate();
        } catch (const ParameterError& e) {
            throw DataError(std::string("measure file: ") + e.what());
        }
    }
    m.canonicalize();
    return mf;
}

MeasureFile parse_measure_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open measure file '" + path + "'");
    return parse_measure(in);
}

void write_measure(std::ostream& out, const DiscreteMeasure& m, bool boundary) {
    out << "measure N=" << m.dim;
    if (boundary) out << " boundary";
    out << "\n";
    for (std::size_t i = 0; i < m.atom_count(); ++i) {
        out << "atom";
        const auto a = m.atom(i);
        for (double c : a) out << ' ' << format_full(c);
        out << ' ' << format_full(m.atom_weights[i]) << "\n";
    }
    if (m.density) {
        const GridDensity& g = *m.density;
        out << "density origin=";
        for (std::size_t d = 0; d < g.origin.size(); ++d) {
            if (d) out << ',';
            out << format_full(g.origin[d]);
        }
        out << " h=" << format_full(g.spacing) << " shape=";
        for (std::size_t d = 0; d < g.shape.size(); ++d) {
            if (d) out << ',';
            out << g.shape[d];
        }
        out << "\n";
        for (std::size_t c = 0; c < g.values.size(); ++c) {
            out << format_full(g.values[c]);
            out << (((c + 1) % 8 == 0 || c + 1 == g.values.size()) ? '\n' : ' ');
        }
    }
}

void write_measure_file(const std::string& path, const DiscreteMeasure& m, bool boundary) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write measure file '" + path + "'");
    write_measure(out, m, boundary);
}

}  // namespace wolffkit
