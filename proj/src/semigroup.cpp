#include "sewlab/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>

namespace sewlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gauss-Hermite by Newton iteration on the orthonormal recurrence
// (overflow-safe up to hundreds of nodes).
Quadrature build_gauss_hermite(int n) {
    if (n < 8) throw config_error("gauss_hermite: need at least 8 nodes");
    // the orthonormal recurrence overflows near the extreme roots well
    // before a thousand nodes
    if (n > 512) throw config_error("gauss_hermite: node counts above 512 are not supported");
    Quadrature q;
    q.nodes.resize(n);
    q.weights.resize(n);
    const int m = (n + 1) / 2;
    double z = 0.0, pp = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(n, 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * q.nodes[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * q.nodes[1];
        else
            z = 2.0 * z - q.nodes[i - 2];
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 0.7511255444649425; // pi^{-1/4}
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        if (!std::isfinite(z) || !std::isfinite(pp) || pp == 0.0)
            throw numerical_error("gauss_hermite: Newton iteration failed at node " +
                                  std::to_string(i));
        q.nodes[i] = z;
        q.nodes[n - 1 - i] = -z;
        q.weights[i] = 2.0 / (pp * pp);
        q.weights[n - 1 - i] = q.weights[i];
    }
    // normalize so the rule is a probability measure
    double sum = 0.0;
    for (double w : q.weights) sum += w;
    for (double& w : q.weights) w /= sum;
    return q;
}

Quadrature build_gauss_legendre01(int n) {
    Quadrature q;
    q.nodes.resize(n);
    q.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        // map from [-1,1] to [0,1]
        q.nodes[i] = 0.5 * (1.0 - z);
        q.nodes[n - 1 - i] = 0.5 * (1.0 + z);
        q.weights[i] = 1.0 / ((1.0 - z * z) * pp * pp);
        q.weights[n - 1 - i] = q.weights[i];
    }
    return q;
}

template <class Builder>
const Quadrature& cached_rule(int n, std::map<int, std::unique_ptr<Quadrature>>& cache,
                              std::mutex& mutex, Builder&& build) {
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Quadrature>(build(n));
    return *slot;
}

// Iterative radix-2 complex FFT (forward, e^{-i 2 pi jk / M}).
void fft_inplace(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

bool is_pow2(int m) { return m > 0 && (m & (m - 1)) == 0; }

} // namespace

const Quadrature& gauss_hermite(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<Quadrature>> cache;
    return cached_rule(n, cache, mutex, build_gauss_hermite);
}

const Quadrature& gauss_legendre_01(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<Quadrature>> cache;
    return cached_rule(n, cache, mutex, build_gauss_legendre01);
}

double DensityGrid::value(double x) const {
    const double u = (x - x0) / dx;
    if (u < 0.0 || u >= static_cast<double>(p.size() - 1)) return 0.0;
    const int k = static_cast<int>(u);
    const double w = u - k;
    return (1.0 - w) * p[k] + w * p[k + 1];
}

double DensityGrid::trapezoid_mass() const {
    double acc = 0.5 * (p.front() + p.back());
    for (std::size_t k = 1; k + 1 < p.size(); ++k) acc += p[k];
    return acc * dx;
}

double stable_tail_mass(double alpha, double t, double R) {
    if (alpha >= 2.0) {
        // Gaussian with variance 2t
        return std::erfc(R / (2.0 * std::sqrt(t)));
    }
    const double c_alpha = std::tgamma(alpha) * std::sin(kPi * alpha / 2.0) / kPi;
    return 2.0 * c_alpha * t * std::pow(R, -alpha);
}

DensityGrid stable_density(double alpha, double t, const StableDensitySpec& spec) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw config_error("stable_density: alpha must lie in (0,2]");
    if (!(t > 0.0)) throw config_error("stable_density: t must be positive");
    if (!is_pow2(spec.points_M)) throw config_error("stable_density: points_M must be a power of two");
    if (!(spec.extent_R > 0.0)) throw config_error("stable_density: extent_R must be positive");

    const double tail = stable_tail_mass(alpha, t, spec.extent_R);
    if (tail > 1e-4) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "stable_density: estimated tail mass %.3e beyond R=%.1f exceeds 1e-4; "
                      "increase the extent",
                      tail, spec.extent_R);
        throw numerical_error(msg);
    }

    const int m = spec.points_M;
    const double dx = 2.0 * spec.extent_R / m;
    const double dl = 2.0 * kPi / (m * dx);
    // lambda grid must reach far enough that the characteristic function has
    // decayed below rounding
    const double lmax = 0.5 * m * dl;
    if (std::exp(-t * std::pow(lmax, alpha)) > 1e-12)
        throw numerical_error("stable_density: characteristic function not resolved; "
                              "increase points_M or decrease extent_R");

    std::vector<std::complex<double>> a(m);
    for (int j = 0; j < m; ++j) {
        const int js = (j <= m / 2) ? j : m - j; // wrapped |frequency| index
        const double lam = js * dl;
        const double phi = std::exp(-t * std::pow(lam, alpha));
        a[j] = ((j % 2 == 0) ? phi : -phi); // (-1)^j realizes the x-shift by -R
    }
    fft_inplace(a);

    DensityGrid grid;
    grid.alpha = alpha;
    grid.t = t;
    grid.dx = dx;
    grid.x0 = -spec.extent_R;
    grid.p.resize(m);
    const double scale = dl / (2.0 * kPi);
    for (int k = 0; k < m; ++k) grid.p[k] = std::max(0.0, a[k].real() * scale);

    // symmetrize and check the invariants
    double max_asym = 0.0;
    for (int k = 1; k < m; ++k) {
        const int kk = m - k;
        if (kk <= k || kk >= m) continue;
        max_asym = std::max(max_asym, std::fabs(grid.p[k] - grid.p[kk]));
        const double avg = 0.5 * (grid.p[k] + grid.p[kk]);
        grid.p[k] = avg;
        grid.p[kk] = avg;
    }
    if (max_asym > 1e-8)
        throw numerical_error("stable_density: density asymmetry " + std::to_string(max_asym));
    const double mass = grid.trapezoid_mass();
    if (mass < 0.999 || mass > 1.001)
        throw numerical_error("stable_density: trapezoid mass " + std::to_string(mass) +
                              " outside [0.999, 1.001]");
    return grid;
}

StableSemigroup::StableSemigroup(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw config_error("StableSemigroup: alpha must lie in (0,2]");
}

const DensityGrid& StableSemigroup::density(double t) {
    // automatic extent: keep the estimated tail below 1e-5, resolution below
    // 1% of the distribution scale t^{1/alpha}
    double R = 50.0;
    if (alpha_ < 2.0) {
        const double c_alpha = std::tgamma(alpha_) * std::sin(kPi * alpha_ / 2.0) / kPi;
        R = std::max(R, std::pow(2.0 * c_alpha * t / 1e-5, 1.0 / alpha_));
    } else {
        R = std::max(R, 10.0 * std::sqrt(t));
    }
    const double dx_target = std::min(0.01, 0.01 * std::pow(t, 1.0 / alpha_));
    int m = 1 << 14;
    while (m < 2.0 * R / dx_target && m < (1 << 21)) m <<= 1;
    StableDensitySpec spec{R, m};
    return density(t, spec);
}

const DensityGrid& StableSemigroup::density(double t, const StableDensitySpec& spec) {
    const long long key_r = static_cast<long long>(spec.extent_R * 1024.0) * (1LL << 23) + spec.points_M;
    std::lock_guard<std::mutex> lock(mutex_);
    auto& slot = cache_[{t, key_r}];
    if (!slot) slot = std::make_unique<DensityGrid>(stable_density(alpha_, t, spec));
    return *slot;
}

double StableSemigroup::apply(const std::function<double(double)>& f, double t, double x) {
    const DensityGrid& grid = density(t);
    double acc = 0.0;
    const int m = static_cast<int>(grid.p.size());
    for (int k = 0; k < m; ++k) {
        const double w = (k == 0 || k == m - 1) ? 0.5 : 1.0;
        acc += w * grid.p[k] * f(x - grid.x_at(k));
    }
    return acc * grid.dx;
}

double StableSemigroup::apply(const std::function<double(double)>& f, double t, double x,
                              const StableDensitySpec& spec) {
    const DensityGrid& grid = density(t, spec);
    double acc = 0.0;
    const int m = static_cast<int>(grid.p.size());
    for (int k = 0; k < m; ++k) {
        const double w = (k == 0 || k == m - 1) ? 0.5 : 1.0;
        acc += w * grid.p[k] * f(x - grid.x_at(k));
    }
    return acc * grid.dx;
}

double negative_besov_norm(const std::function<double(double)>& f, double gamma,
                           const std::vector<double>& t_grid, double x_range, int x_points,
                           int nodes) {
    if (!(gamma < 0.0)) throw config_error("negative_besov_norm: gamma must be negative");
    if (t_grid.empty()) throw config_error("negative_besov_norm: empty t grid");
    double best = 0.0;
    for (double t : t_grid) {
        if (!(t > 0.0 && t <= 1.0)) throw config_error("negative_besov_norm: t grid must lie in (0,1]");
        const double factor = std::pow(t, -gamma / 2.0);
        for (int i = 0; i < x_points; ++i) {
            const double x = -x_range + 2.0 * x_range * i / (x_points - 1);
            best = std::max(best, factor * std::fabs(heat_apply(f, t, x, nodes)));
        }
    }
    return best;
}

std::vector<double> log_spaced(double a, double b, int k) {
    if (!(a > 0.0 && b > a && k >= 2)) throw config_error("log_spaced: need 0 < a < b, k >= 2");
    std::vector<double> out(k);
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < k; ++i) out[i] = std::exp(la + (lb - la) * i / (k - 1));
    return out;
}

} // namespace sewlab
