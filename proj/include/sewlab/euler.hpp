#pragma once

#include "sewlab/drift.hpp"
#include "sewlab/grid.hpp"
#include "sewlab/noise.hpp"

#include <vector>

namespace sewlab {

// kappa_n(t) = floor(nt)/n, the largest gridpoint <= t (kappa_n(1) = 1).
double kappa(int n, double t);

// Euler scheme with drift frozen at the coarse nodes kappa_n, evaluated on
// the (finer) grid of the supplied noise path: the noise grid size must be a
// multiple of n. With zero drift the result is exactly x0 + noise.
Path euler_path(const DriftSpec& drift, const Path& noise_path, const std::vector<double>& x0,
                int n);

struct EulerConfig {
    DriftSpec drift;
    NoiseModel noise;
    std::vector<double> x0;
    int n_coarse = 0;
    int n_ref = 0;
    int m = 2;

    // n_ref == n_coarse is allowed as the exact-coupling diagnostic;
    // otherwise the reference grid must be at least 4x finer.
    void validate() const;
};

struct ErrorSample {
    double sup_error = 0.0;      // max over coarse gridpoints of |X_ref - X_n|
    double terminal_error = 0.0; // value at t = 1
};

// Samples one noise path on the n_ref grid, solves the reference scheme at
// n_ref and the coarse scheme at n_coarse from the same path, and extracts
// the pathwise error at the coarse gridpoints.
ErrorSample coupled_error(const EulerConfig& config, const SeedSpec& seed, std::uint64_t stream);

// Same extraction against an already-sampled noise path (used by the rate
// harness to reuse one path across the whole n-list).
ErrorSample coupled_error_on_path(const EulerConfig& config, const Path& noise_path);

} // namespace sewlab
