#include "sewlab/euler.hpp"

#include <cmath>

namespace sewlab {

double kappa(int n, double t) {
    if (n <= 0) throw config_error("kappa: n must be positive");
    // small forward tolerance so that t = i/n lands on i even after rounding
    const double u = static_cast<double>(n) * t;
    long long k = static_cast<long long>(std::floor(u + 1e-9));
    if (k < 0) k = 0;
    if (k > n) k = n;
    return static_cast<double>(k) / n;
}

Path euler_path(const DriftSpec& drift, const Path& noise_path, const std::vector<double>& x0,
                int n) {
    const int n_fine = noise_path.grid.n_steps;
    if (n <= 0 || n_fine % n != 0)
        throw config_error("euler_path: coarse step count must divide the noise grid");
    const int dim = noise_path.dim;
    if (static_cast<int>(x0.size()) != dim)
        throw config_error("euler_path: x0 dimension mismatch");

    const int k = n_fine / n;
    const double dt_fine = noise_path.grid.dt();

    Path out(noise_path.grid, dim);
    // accumulated form X_i = x0 + D_i + W_i keeps the zero-drift scheme
    // bitwise equal to x0 + noise
    std::vector<double> drift_accum(dim, 0.0);
    std::vector<double> frozen_drift(dim, 0.0);
    for (int j = 0; j < dim; ++j) out.at(0, j) = x0[j] + noise_path.at(0, j);

    for (int i = 0; i < n_fine; ++i) {
        if (i % k == 0) {
            for (int j = 0; j < dim; ++j)
                frozen_drift[j] = drift(x0[j] + drift_accum[j] + noise_path.at(i, j));
        }
        for (int j = 0; j < dim; ++j) {
            drift_accum[j] += dt_fine * frozen_drift[j];
            out.at(i + 1, j) = x0[j] + drift_accum[j] + noise_path.at(i + 1, j);
        }
    }
    return out;
}

void EulerConfig::validate() const {
    noise.validate();
    if (n_coarse <= 0 || n_ref <= 0) throw config_error("EulerConfig: grid sizes must be positive");
    if (n_ref % n_coarse != 0) throw config_error("EulerConfig: n_ref must be a multiple of n_coarse");
    if (n_ref != n_coarse && n_ref < 4 * n_coarse)
        throw config_error("EulerConfig: n_ref must be at least 4*n_coarse (or equal for the "
                           "exact-coupling diagnostic)");
    if (static_cast<int>(x0.size()) != noise.dim) throw config_error("EulerConfig: x0 dimension mismatch");
    if (m < 1) throw config_error("EulerConfig: moment order must be >= 1");
}

ErrorSample coupled_error_on_path(const EulerConfig& config, const Path& noise_path) {
    const Path ref = euler_path(config.drift, noise_path, config.x0, config.n_ref);
    const Path coarse = euler_path(config.drift, noise_path, config.x0, config.n_coarse);

    const int n_fine = noise_path.grid.n_steps;
    const int stride = n_fine / config.n_coarse;
    const int dim = noise_path.dim;

    ErrorSample sample;
    for (int c = 0; c <= config.n_coarse; ++c) {
        const int i = c * stride;
        double norm2 = 0.0;
        for (int j = 0; j < dim; ++j) {
            const double d = ref.at(i, j) - coarse.at(i, j);
            norm2 += d * d;
        }
        const double norm = (dim == 1) ? std::fabs(ref.at(i, 0) - coarse.at(i, 0)) : std::sqrt(norm2);
        if (norm > sample.sup_error) sample.sup_error = norm;
        if (c == config.n_coarse) sample.terminal_error = norm;
    }
    return sample;
}

ErrorSample coupled_error(const EulerConfig& config, const SeedSpec& seed, std::uint64_t stream) {
    config.validate();
    const Grid grid(config.n_ref);
    const Path noise_path = sample_noise(config.noise, grid, seed, stream);
    return coupled_error_on_path(config, noise_path);
}

} // namespace sewlab
