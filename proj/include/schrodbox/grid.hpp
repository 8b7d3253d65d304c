#pragma once

#include <cmath>
#include <string>

#include "schrodbox/errors.hpp"

namespace schrodbox {

// Uniform 1D node grid covering [x_min, x_max] with the open window [a, b]
// marked on it. Nodes sit at x_min + j*dx; a and b must coincide with nodes.
struct Grid {
    double x_min = 0.0;
    double x_max = 0.0;
    double dx = 0.0;
    int n_points = 0;
    double a = 0.0;  // window edges (transport region)
    double b = 0.0;
    int ia = 0;  // node index of a
    int ib = 0;  // node index of b

    double x(int j) const { return x_min + j * dx; }
};

namespace detail {

// Nodes must hit segment endpoints within 1 pm.
inline constexpr double kGridSnapTol = 1e-9;

inline int snap_to_node(double span, double dx, const char* what) {
    const double steps = span / dx;
    const int n = static_cast<int>(std::llround(steps));
    if (std::abs(span - n * dx) > kGridSnapTol) {
        throw NonCommensurateGrid(std::string(what) + " span " + std::to_string(span) +
                                  " is not a multiple of dx=" + std::to_string(dx));
    }
    return n;
}

}  // namespace detail

inline Grid build_grid(double x_min, double x_max, double dx, double a, double b) {
    if (!(dx > 0.0)) throw NonCommensurateGrid("dx must be positive");
    if (!(x_min < x_max)) throw NonCommensurateGrid("empty grid extent");
    if (a > b) throw NonCommensurateGrid("window has a > b");
    if (a < x_min - detail::kGridSnapTol || b > x_max + detail::kGridSnapTol) {
        throw NonCommensurateGrid("window [a,b] outside grid extent");
    }
    Grid g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.dx = dx;
    g.n_points = detail::snap_to_node(x_max - x_min, dx, "grid") + 1;
    g.a = a;
    g.b = b;
    g.ia = detail::snap_to_node(a - x_min, dx, "left layer");
    g.ib = detail::snap_to_node(b - x_min, dx, "window");
    return g;
}

}  // namespace schrodbox
