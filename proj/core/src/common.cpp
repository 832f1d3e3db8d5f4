#include "wolffkit/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

namespace wolffkit {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

double Box::diameter() const {
    double s = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        const double d = hi[i] - lo[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double Box::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
}

bool Box::contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
}

double Box::boundary_distance(std::span<const double> x) const {
    if (!contains(x)) return 0.0;
    double d = kInfinity;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        d = std::min(d, x[i] - lo[i]);
        d = std::min(d, hi[i] - x[i]);
    }
    return d;
}

Box Box::inflated(double margin) const {
    Box b = *this;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        b.lo[i] -= margin;
        b.hi[i] += margin;
    }
    return b;
}

Box Box::hull(const Box& a, const Box& b) {
    if (a.dim() != b.dim()) throw ParameterError("box hull: dimension mismatch");
    Box h = a;
    for (int i = 0; i < a.dim(); ++i) {
        h.lo[i] = std::min(a.lo[i], b.lo[i]);
        h.hi[i] = std::max(a.hi[i], b.hi[i]);
    }
    return h;
}

Box Box::cube(int dim, double lo, double hi) {
    Box b;
    b.lo.assign(static_cast<std::size_t>(dim), lo);
    b.hi.assign(static_cast<std::size_t>(dim), hi);
    return b;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& run_chunk) {
    if (n == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(std::max(threads, 1), n);
    if (workers <= 1) {
        run_chunk(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t base = n / workers;
    const std::size_t extra = n % workers;
    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t len = base + (w < extra ? 1 : 0);
        pool.emplace_back(run_chunk, begin, begin + len);
        begin += len;
    }
    for (auto& t : pool) t.join();
}

// xoshiro256** — small, fully specified, reproducible across platforms.
namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}
}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
}

std::uint64_t Rng::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

std::string format_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join_csv(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    return line;
}

}  // namespace wolffkit
