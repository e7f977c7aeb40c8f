#pragma once

#include "sewlab/drift.hpp"
#include "sewlab/grid.hpp"

#include <functional>
#include <vector>

namespace sewlab {

// Context handed to germ evaluations: the realized noise path (d = 1 for all
// scalar germs here) plus exact value lookup at grid times.
struct GermContext {
    const Path* path = nullptr;

    double value_at(double t, int coord = 0) const;
};

// Two-parameter germ A_{s,t}; the local model of an increment.
using Germ = std::function<double(double s, double t, const GermContext&)>;

// delta A_{s,u,t} = A_{s,t} - A_{s,u} - A_{u,t}, the additivity defect.
double delta_germ(const Germ& germ, double s, double u, double t, const GermContext& ctx);

// Riemann sums of a germ over dyadic partitions of [S,T].
struct DyadicSums {
    int max_level = 0;
    std::vector<double> sums;  // A^{(n)}, n = 0..max_level
    std::vector<double> diffs; // |A^{(n+1)} - A^{(n)}|, n = 0..max_level-1
};

DyadicSums dyadic_riemann(const Germ& germ, double S, double T, int max_level,
                          const GermContext& ctx);

// Shifted variant: the first cell of every partition level is omitted, so
// A^{(n)} = sum_{i=1}^{2^n-1} A_{t_i, t_{i+1}}.
DyadicSums shifted_dyadic_riemann(const Germ& germ, double S, double T, int max_level,
                                  const GermContext& ctx);

// Additive germ A_{s,t} = g(t) - g(s); sews exactly at every level.
Germ make_additive_germ(std::function<double(double)> g);

// Young germ A_{s,t} = f_s (g_t - g_s) with f, g read from path coordinates.
Germ make_young_germ(int f_coord = 0, int g_coord = 1);

// Conditional-expectation germ for the pair bound on Brownian shifts:
//   A_{s,t} = int_s^t ( P_{r-s} b(W_s + x) - P_{r-s} b(W_s + y) ) dr,
// with the semigroup evaluated by Gauss-Hermite quadrature and the time
// integral by Gauss-Legendre per cell. Node counts are the accuracy knobs.
Germ ssl_bm_pair_germ(const DriftSpec& b, double x, double y, int time_nodes = 16,
                      int heat_nodes = 64);

// Least-squares slope of log2(diffs) against the level index.
struct OrderFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
};

OrderFit estimate_order(const std::vector<double>& diff_norms);

} // namespace sewlab
