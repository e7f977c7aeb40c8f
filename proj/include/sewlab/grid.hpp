#pragma once

#include "sewlab/errors.hpp"

#include <vector>

namespace sewlab {

// Uniform grid on the unit horizon [0,1], t_i = i/n_steps.
struct Grid {
    int n_steps = 0;

    Grid() = default;
    explicit Grid(int n) : n_steps(n) {
        if (n <= 0) throw config_error("Grid: n_steps must be positive");
    }

    double dt() const { return 1.0 / n_steps; }
    double time(int i) const { return static_cast<double>(i) / n_steps; }
    int n_points() const { return n_steps + 1; }

    std::vector<double> times() const {
        std::vector<double> t(n_points());
        for (int i = 0; i < n_points(); ++i) t[i] = time(i);
        return t;
    }
};

// Sampled values of a d-dimensional process on a Grid, row-major
// [n_steps+1][dim].
struct Path {
    Grid grid;
    int dim = 1;
    std::vector<double> values;

    Path() = default;
    Path(const Grid& g, int d) : grid(g), dim(d), values(static_cast<std::size_t>(g.n_points()) * d, 0.0) {
        if (d <= 0) throw config_error("Path: dim must be positive");
    }

    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * dim + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * dim + j]; }

    // Scalar shortcut for d=1 contexts (semigroup probes, sewing germs).
    double value(int i) const { return values[static_cast<std::size_t>(i) * dim]; }
};

} // namespace sewlab
