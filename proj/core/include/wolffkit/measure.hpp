#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wolffkit/common.hpp"

namespace wolffkit {

// Uniform-spacing density grid.  Cell (i_1,...,i_N) occupies
// origin + [i*h, (i+1)*h) per axis and is represented by its center
// origin + (i + 1/2)*h; values are densities per unit volume, so the cell
// mass is value * h^N.  Storage is row major with the last axis fastest.
struct GridDensity {
    Point origin;
    double spacing = 0.0;
    std::vector<int> shape;
    std::vector<double> values;

    int dim() const { return static_cast<int>(shape.size()); }
    std::size_t cell_count() const;
    double cell_volume() const;
    void cell_center(std::size_t flat, double* out) const;
    double total_mass() const;
    Box bounding_box() const;

    // Throws ParameterError on negative values, empty shape, dim > 3,
    // non-positive spacing, or a value count that does not match the shape.
    void validate() const;
};

// Nonnegative measure: finitely many weighted atoms plus an optional density
// grid.  Atoms are kept in canonical order (lexicographic by location, then
// weight) so that summation order is reproducible.
struct DiscreteMeasure {
    int dim = 0;
    std::vector<double> atom_coords;   // atom_count * dim, canonical order
    std::vector<double> atom_weights;
    std::optional<GridDensity> density;

    std::size_t atom_count() const { return atom_weights.size(); }
    std::span<const double> atom(std::size_t i) const {
        return {atom_coords.data() + i * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }

    // Appends without re-sorting; call canonicalize() when done.
    void add_atom(std::span<const double> x, double weight);
    void canonicalize();

    bool empty() const;
    double total_mass() const;
    // Bounding box of atoms and grid; throws DataError when the measure is
    // identically zero.
    Box support_box() const;
    double nearest_atom_distance(std::span<const double> x) const;  // +inf if atom-free
};

DiscreteMeasure scale_measure(const DiscreteMeasure& m, double lambda);

struct Region {
    enum class Kind { ball, box };
    Kind kind = Kind::ball;
    Point center;
    double radius = 0.0;
    Box box;

    static Region make_ball(Point center, double radius);
    static Region make_box(Box b);
    bool contains(std::span<const double> x) const;
};

// Drops atoms outside the region and zeroes density cells whose centers fall
// outside (grid geometry is preserved).
DiscreteMeasure restrict_measure(const DiscreteMeasure& m, const Region& region);

// Reference path: one pass over every atom and every cell in canonical /
// row-major order.  The indexed path must reproduce this bit for bit.
double ball_mass_brute(const DiscreteMeasure& m, std::span<const double> x, double r);

// Accelerated mass queries.  Holds a pointer to the measure; the measure must
// outlive the index.
class BallMassIndex {
public:
    explicit BallMassIndex(const DiscreteMeasure& m);

    // mu(closed ball B_r(x)); negative r is a ParameterError.
    double ball_mass(std::span<const double> x, double r) const;
    // Density part via the prefix-sum table, atoms by direct scan.
    double box_mass(const Box& b) const;

    const DiscreteMeasure& measure() const { return *m_; }

private:
    const DiscreteMeasure* m_;
    // Prefix sums of cell masses over an (n_1+1) x ... x (n_N+1) table.
    std::vector<double> prefix_;
    std::vector<std::size_t> prefix_stride_;

    double density_ball_mass(std::span<const double> x, double r) const;
    double density_box_mass(const Box& b) const;
};

// measure file format
//   measure N=<dim> [boundary]
//   atom <x_1> ... <x_N> <weight>
//   density origin=<x_1,...,x_N> h=<spacing> shape=<n_1,...,n_N>
//   <values, row major, whitespace separated, possibly spanning lines>
// Blank lines and lines starting with '#' are ignored.
struct MeasureFile {
    DiscreteMeasure measure;
    bool boundary = false;
};

MeasureFile parse_measure(std::istream& in);
MeasureFile parse_measure_file(const std::string& path);
void write_measure(std::ostream& out, const DiscreteMeasure& m, bool boundary = false);
void write_measure_file(const std::string& path, const DiscreteMeasure& m, bool boundary = false);

}  // namespace wolffkit
