#pragma once

#include "sewlab/errors.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace sewlab {

// Nodes/weights of a quadrature rule. For Gauss-Hermite the weights are
// normalized to sum to exactly 1, so rules act as discrete probability
// measures (P_t 1 = 1 holds to the ulp).
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
    int size() const { return static_cast<int>(nodes.size()); }
};

// Gauss-Hermite rule for weight exp(-x^2), normalized; cached per n.
const Quadrature& gauss_hermite(int n);

// Gauss-Legendre rule mapped to [0,1]; cached per n.
const Quadrature& gauss_legendre_01(int n);

// Heat semigroup P_t f(x) = E f(x - sqrt(t) Z), evaluated by Gauss-Hermite
// quadrature. 64 nodes by default; the node count is the accuracy knob.
inline constexpr int kHeatNodesDefault = 64;

template <class F>
double heat_apply(F&& f, double t, double x, int nodes = kHeatNodesDefault) {
    if (!(t > 0.0)) throw config_error("heat_apply: t must be positive");
    const Quadrature& q = gauss_hermite(nodes);
    const double c = std::sqrt(2.0 * t);
    double acc = 0.0;
    for (int k = 0; k < q.size(); ++k) acc += q.weights[k] * f(x - c * q.nodes[k]);
    return acc;
}

// Tabulated density of the symmetric alpha-stable law with characteristic
// function exp(-t |l|^alpha), obtained by FFT inversion on [-R, R).
struct StableDensitySpec {
    double extent_R = 50.0;
    int points_M = 1 << 14; // power of two
};

struct DensityGrid {
    double alpha = 0.0;
    double t = 0.0;
    double x0 = 0.0; // leftmost abscissa
    double dx = 0.0;
    std::vector<double> p;

    double x_at(int k) const { return x0 + k * dx; }
    // Linear interpolation; zero outside the tabulated window.
    double value(double x) const;
    double trapezoid_mass() const;
};

// One-off tabulation with the exact spec given (invariants checked: mass,
// symmetry, positivity). Throws numerical_error when the estimated tail mass
// beyond R exceeds 1e-4, suggesting a larger extent.
DensityGrid stable_density(double alpha, double t, const StableDensitySpec& spec = {});

// Estimated mass of the stable law outside [-R, R] (asymptotic power tail
// for alpha < 2, Gaussian tail at alpha = 2).
double stable_tail_mass(double alpha, double t, double R);

// Per-(alpha, t) cache with automatic extent/resolution selection; densities
// are immutable after construction, so concurrent reads are safe.
class StableSemigroup {
public:
    explicit StableSemigroup(double alpha);

    double alpha() const { return alpha_; }
    const DensityGrid& density(double t);
    const DensityGrid& density(double t, const StableDensitySpec& spec);

    // Trapezoid convolution of f against the tabulated density.
    double apply(const std::function<double(double)>& f, double t, double x);
    double apply(const std::function<double(double)>& f, double t, double x,
                 const StableDensitySpec& spec);

private:
    double alpha_;
    std::mutex mutex_;
    std::map<std::pair<double, long long>, std::unique_ptr<DensityGrid>> cache_;
};

// Grid lower bound for the negative Besov norm sup_t t^{-gamma/2} |P_t f|_inf
// of Def-4.1 type, evaluated over t_grid x an x-grid on [-x_range, x_range].
double negative_besov_norm(const std::function<double(double)>& f, double gamma,
                           const std::vector<double>& t_grid, double x_range = 3.0,
                           int x_points = 121, int nodes = kHeatNodesDefault);

// k log-spaced points in [a, b].
std::vector<double> log_spaced(double a, double b, int k);

} // namespace sewlab
