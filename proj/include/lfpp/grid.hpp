#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace lfpp {

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline int next_power_of_two(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// Square torus discretization: n vertices per side over physical extent
/// side_length, so the lattice spacing is side_length / n.
struct GridSpec {
    int n = 0;
    double side_length = 0.0;

    double spacing() const { return side_length / n; }
    std::int64_t vertex_count() const { return std::int64_t(n) * n; }

    void validate() const {
        if (n < 16) throw std::invalid_argument("GridSpec: n must be >= 16, got " + std::to_string(n));
        if (!is_power_of_two(n)) throw std::invalid_argument("GridSpec: n must be a power of two, got " + std::to_string(n));
        if (!(side_length > 0.0)) throw std::invalid_argument("GridSpec: side_length must be positive");
    }
};

/// Lattice vertex, coordinates in [0, n).
struct Vertex {
    int x = 0;
    int y = 0;
    friend bool operator==(const Vertex&, const Vertex&) = default;
};

/// Point in physical units on the torus.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline int wrap_index(int i, int n) {
    int r = i % n;
    return r < 0 ? r + n : r;
}

inline std::int64_t flat_index(Vertex v, int n) { return std::int64_t(wrap_index(v.x, n)) + std::int64_t(n) * wrap_index(v.y, n); }

inline Point vertex_position(Vertex v, const GridSpec& g) {
    return Point{v.x * g.spacing(), v.y * g.spacing()};
}

inline Vertex nearest_vertex(Point p, const GridSpec& g) {
    double s = g.spacing();
    return Vertex{wrap_index(int(std::lround(p.x / s)), g.n), wrap_index(int(std::lround(p.y / s)), g.n)};
}

inline Point grid_center(const GridSpec& g) {
    return Point{g.side_length / 2.0, g.side_length / 2.0};
}

/// Signed displacement a-b on the torus, wrapped to (-L/2, L/2].
inline double torus_delta(double a, double b, double L) {
    double d = a - b;
    d -= L * std::floor(d / L + 0.5);
    return d;
}

inline double torus_distance(Point a, Point b, double L) {
    double dx = torus_delta(a.x, b.x, L);
    double dy = torus_delta(a.y, b.y, L);
    return std::hypot(dx, dy);
}

}  // namespace lfpp
