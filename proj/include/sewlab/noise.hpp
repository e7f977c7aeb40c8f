#pragma once

#include "sewlab/grid.hpp"
#include "sewlab/rng.hpp"

#include <cstdint>
#include <string>

namespace sewlab {

enum class NoiseKind { BM, FBM, STABLE };

// Tagged family {BM, FBM(H), STABLE(alpha)}. hurst is meaningful only for
// FBM, alpha only for STABLE; validate() enforces that.
struct NoiseModel {
    NoiseKind kind = NoiseKind::BM;
    double hurst = 0.0;
    double alpha = 0.0;
    int dim = 1;

    static NoiseModel bm(int dim = 1) { return NoiseModel{NoiseKind::BM, 0.0, 0.0, dim}; }
    static NoiseModel fbm(double hurst, int dim = 1) {
        return NoiseModel{NoiseKind::FBM, hurst, 0.0, dim};
    }
    static NoiseModel stable(double alpha, int dim = 1) {
        return NoiseModel{NoiseKind::STABLE, 0.0, alpha, dim};
    }

    void validate() const;
    std::string describe() const;
};

// Master seed plus the rule "path index k -> independent substream".
struct SeedSpec {
    std::uint64_t master_seed = 0;

    rng::Stream stream(std::uint64_t k, std::uint64_t sub0 = 0, std::uint64_t sub1 = 0) const {
        return rng::Stream(master_seed, k, sub0, sub1);
    }
};

// Exact-in-distribution samplers. All are pure functions of
// (grid, parameters, seed, stream) and safe to call concurrently.
Path sample_bm(const Grid& grid, int dim, const SeedSpec& seed, std::uint64_t stream);

// Covariance of a scalar fBM: (t^2H + s^2H - |t-s|^2H)/2.
double fbm_covariance(double s, double t, double hurst);

// Exact sampling via Cholesky factorization of the increment covariance;
// factor cached per (n_steps, hurst). n_steps above the cap is refused.
inline constexpr int kFbmCholeskyCap = 4096;
Path sample_fbm(const Grid& grid, double hurst, int dim, const SeedSpec& seed,
                std::uint64_t stream);

// Symmetric alpha-stable increments via the Chambers-Mallows-Stuck sampler,
// normalized so E exp(i l L_t) = exp(-|l|^alpha t) per coordinate.
Path sample_stable(const Grid& grid, double alpha, int dim, const SeedSpec& seed,
                   std::uint64_t stream);

Path sample_noise(const NoiseModel& model, const Grid& grid, const SeedSpec& seed,
                  std::uint64_t stream);

// One standard CMS variate with char. function exp(-|l|^alpha).
double stable_variate(double alpha, rng::Stream& gen);

namespace detail {
// Smallest diagonal pivot seen while factoring the fBM increment covariance
// on the given grid; exposed for the PSD property test.
double fbm_factor_min_pivot(int n_steps, double hurst);
} // namespace detail

} // namespace sewlab
