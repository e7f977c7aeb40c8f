#pragma once

#include "sewlab/errors.hpp"
#include "sewlab/kernels.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace sewlab {

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
};

// Sample mean and standard error with the fixed pairwise reduction.
inline MeanSE mean_se(const double* v, std::size_t n) {
    if (n == 0) throw degenerate_data_error("mean_se: empty sample");
    MeanSE out;
    out.mean = kernels::pairwise_sum(v, n) / static_cast<double>(n);
    if (n > 1) {
        std::vector<double> sq(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = v[i] - out.mean;
            sq[i] = d * d;
        }
        const double var = kernels::pairwise_sum(sq.data(), n) / static_cast<double>(n - 1);
        out.se = std::sqrt(var / static_cast<double>(n));
    }
    return out;
}

inline MeanSE mean_se(const std::vector<double>& v) { return mean_se(v.data(), v.size()); }

// L_m norm over a Monte Carlo sample, (mean v^m)^(1/m), with the delta-method
// standard error.
inline MeanSE lm_norm_se(const std::vector<double>& v, int m) {
    if (m < 1) throw config_error("lm_norm_se: moment order must be >= 1");
    std::vector<double> powed(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double p = v[i];
        for (int j = 1; j < m; ++j) p *= v[i];
        powed[i] = p;
    }
    const MeanSE moments = mean_se(powed);
    MeanSE out;
    if (moments.mean <= 0.0) {
        out.mean = 0.0;
        out.se = 0.0;
        return out;
    }
    out.mean = std::pow(moments.mean, 1.0 / m);
    out.se = moments.se * out.mean / (m * moments.mean);
    return out;
}

// Ordinary least squares y = a + b x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
};

inline LineFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw degenerate_data_error("ols: need at least 2 matched points");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw degenerate_data_error("ols: degenerate abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy > 0.0) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            ssr += r * r;
        }
        fit.r_squared = 1.0 - ssr / syy;
    }
    return fit;
}

} // namespace sewlab
