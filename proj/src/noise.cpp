#include "sewlab/noise.hpp"

#include "sewlab/errors.hpp"
#include "sewlab/kernels.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

namespace sewlab {

void NoiseModel::validate() const {
    if (dim <= 0) throw config_error("NoiseModel: dim must be positive");
    switch (kind) {
    case NoiseKind::BM:
        break;
    case NoiseKind::FBM:
        if (!(hurst > 0.0 && hurst < 1.0))
            throw config_error("NoiseModel: hurst must lie in (0,1)");
        break;
    case NoiseKind::STABLE:
        if (!(alpha > 0.0 && alpha <= 2.0))
            throw config_error("NoiseModel: alpha must lie in (0,2]");
        break;
    }
}

std::string NoiseModel::describe() const {
    switch (kind) {
    case NoiseKind::BM:
        return "bm";
    case NoiseKind::FBM:
        return "fbm:" + std::to_string(hurst);
    case NoiseKind::STABLE:
        return "stable:" + std::to_string(alpha);
    }
    return "?";
}

Path sample_bm(const Grid& grid, int dim, const SeedSpec& seed, std::uint64_t stream) {
    if (dim <= 0 || grid.n_steps <= 0) throw config_error("sample_bm: dim and n_steps must be positive");
    rng::Stream gen = seed.stream(stream);
    Path path(grid, dim);
    const double sd = std::sqrt(grid.dt());
    for (int i = 1; i <= grid.n_steps; ++i)
        for (int j = 0; j < dim; ++j) path.at(i, j) = path.at(i - 1, j) + sd * gen.normal();
    return path;
}

double fbm_covariance(double s, double t, double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw config_error("fbm_covariance: hurst must lie in (0,1)");
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::fabs(t - s), h2));
}

namespace {

// Lower-triangular Cholesky factor, packed row by row.
struct PackedLower {
    int n = 0;
    double min_pivot = 0.0;
    std::vector<double> l; // row i starts at i*(i+1)/2, length i+1

    const double* row(int i) const { return l.data() + static_cast<std::size_t>(i) * (i + 1) / 2; }
};

// Covariance of fBM increments on the uniform grid (fractional Gaussian
// noise): c(k) = h^2H (|k+1|^2H + |k-1|^2H - 2|k|^2H)/2.
std::vector<double> fgn_covariance_row(int n, double hurst) {
    std::vector<double> c(n);
    const double h2 = 2.0 * hurst;
    for (int k = 0; k < n; ++k) {
        const double kk = static_cast<double>(k);
        c[k] = 0.5 * (std::pow(kk + 1.0, h2) + std::pow(std::fabs(kk - 1.0), h2) - 2.0 * std::pow(kk, h2));
    }
    const double scale = std::pow(1.0 / n, h2);
    for (auto& v : c) v *= scale;
    return c;
}

PackedLower cholesky_fgn(int n, double hurst) {
    const std::vector<double> c = fgn_covariance_row(n, hurst);
    PackedLower f;
    f.n = n;
    f.l.assign(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0);
    f.min_pivot = c[0];
    auto at = [&f](int i, int j) -> double& {
        return f.l[static_cast<std::size_t>(i) * (i + 1) / 2 + j];
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double cov = c[i - j];
            const double off = kernels::dot(f.row(i), f.row(j), static_cast<std::size_t>(j));
            if (j < i) {
                at(i, j) = (cov - off) / at(j, j);
            } else {
                double d = cov - off;
                if (d < f.min_pivot) f.min_pivot = d;
                if (d <= 0.0) {
                    if (d < -1e-10)
                        throw numerical_error("fBM covariance factorization failed: pivot " +
                                              std::to_string(i) + " = " + std::to_string(d));
                    d = 1e-12; // jitter for harmless rounding-level negatives
                }
                at(i, j) = std::sqrt(d);
            }
        }
    }
    return f;
}

const PackedLower& fgn_factor(int n, double hurst) {
    static std::mutex mutex;
    static std::map<std::pair<int, double>, std::unique_ptr<PackedLower>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{n, hurst}];
    if (!slot) slot = std::make_unique<PackedLower>(cholesky_fgn(n, hurst));
    return *slot;
}

} // namespace

namespace detail {
double fbm_factor_min_pivot(int n_steps, double hurst) {
    return fgn_factor(n_steps, hurst).min_pivot;
}
} // namespace detail

Path sample_fbm(const Grid& grid, double hurst, int dim, const SeedSpec& seed,
                std::uint64_t stream) {
    if (dim <= 0 || grid.n_steps <= 0)
        throw config_error("sample_fbm: dim and n_steps must be positive");
    if (!(hurst > 0.0 && hurst < 1.0)) throw config_error("sample_fbm: hurst must lie in (0,1)");
    if (grid.n_steps > kFbmCholeskyCap)
        throw config_error("sample_fbm: n_steps exceeds the Cholesky cap " +
                           std::to_string(kFbmCholeskyCap));

    const PackedLower& lower = fgn_factor(grid.n_steps, hurst);
    rng::Stream gen = seed.stream(stream);
    Path path(grid, dim);
    const int n = grid.n_steps;
    std::vector<double> z(static_cast<std::size_t>(n));
    for (int j = 0; j < dim; ++j) {
        for (int i = 0; i < n; ++i) z[i] = gen.normal();
        for (int i = 0; i < n; ++i) {
            const double inc = kernels::dot(lower.row(i), z.data(), static_cast<std::size_t>(i) + 1);
            path.at(i + 1, j) = path.at(i, j) + inc;
        }
    }
    return path;
}

double stable_variate(double alpha, rng::Stream& gen) {
    // Chambers-Mallows-Stuck, symmetric case.
    const double u = 3.14159265358979323846 * (gen.uniform_open() - 0.5);
    const double e = gen.exponential();
    if (alpha == 1.0) return std::tan(u);
    const double au = alpha * u;
    const double t1 = std::sin(au) / std::pow(std::cos(u), 1.0 / alpha);
    const double t2 = std::pow(std::cos(u - au) / e, (1.0 - alpha) / alpha);
    return t1 * t2;
}

Path sample_stable(const Grid& grid, double alpha, int dim, const SeedSpec& seed,
                   std::uint64_t stream) {
    if (dim <= 0 || grid.n_steps <= 0)
        throw config_error("sample_stable: dim and n_steps must be positive");
    if (!(alpha > 0.0 && alpha <= 2.0)) throw config_error("sample_stable: alpha must lie in (0,2]");
    rng::Stream gen = seed.stream(stream);
    Path path(grid, dim);
    const double scale = std::pow(grid.dt(), 1.0 / alpha);
    for (int i = 1; i <= grid.n_steps; ++i)
        for (int j = 0; j < dim; ++j)
            path.at(i, j) = path.at(i - 1, j) + scale * stable_variate(alpha, gen);
    return path;
}

Path sample_noise(const NoiseModel& model, const Grid& grid, const SeedSpec& seed,
                  std::uint64_t stream) {
    model.validate();
    switch (model.kind) {
    case NoiseKind::BM:
        return sample_bm(grid, model.dim, seed, stream);
    case NoiseKind::FBM:
        return sample_fbm(grid, model.hurst, model.dim, seed, stream);
    case NoiseKind::STABLE:
        return sample_stable(grid, model.alpha, model.dim, seed, stream);
    }
    throw config_error("sample_noise: unknown noise kind");
}

} // namespace sewlab
