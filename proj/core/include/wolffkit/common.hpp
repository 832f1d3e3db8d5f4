#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wolffkit {

// Bad argument values, out-of-range exponents, malformed calls.  The CLI maps
// this to exit code 2.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Unreadable or inconsistent input data (files, measures).  CLI exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

using Point = std::vector<double>;

double squared_distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);

// Axis-aligned box, the only domain shape used for truncated potentials and
// evaluation lattices.
struct Box {
    Point lo;
    Point hi;

    int dim() const { return static_cast<int>(lo.size()); }
    double diameter() const;
    double volume() const;
    bool contains(std::span<const double> x) const;
    // Distance from an interior point to the boundary (0 on or outside).
    double boundary_distance(std::span<const double> x) const;
    Box inflated(double margin) const;
    static Box hull(const Box& a, const Box& b);
    static Box cube(int dim, double lo, double hi);
};

// Runs run_chunk(begin, end) over a contiguous split of [0, n).  Each chunk
// writes to disjoint output slots, so results do not depend on the worker
// count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& run_chunk);

// Seeded generator with a hand-rolled 53-bit uniform draw; avoids
// std::uniform_real_distribution so the stream is pinned by the engine alone.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    double uniform01();
    double uniform(double lo, double hi);

private:
    std::uint64_t s_[4];
    std::uint64_t next();
};

// Fixed-format float for CSV output: shortest round-trippable representation
// would vary in length, so use a pinned %.12g (cache files use format_full).
std::string format_num(double v);
std::string format_full(double v);  // %.17g, exact double round trip

std::string join_csv(const std::vector<std::string>& cells);

}  // namespace wolffkit
