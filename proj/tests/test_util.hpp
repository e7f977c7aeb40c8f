#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace sewlab::testutil {

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / a.size();
        const double fb = static_cast<double>(j) / b.size();
        d = std::max(d, std::fabs(fa - fb));
    }
    return d;
}

// true iff the two samples pass a two-sample KS test at the given level
// (0.01 or 0.05).
inline bool ks_pass(const std::vector<double>& a, const std::vector<double>& b, double level) {
    const double c = level <= 0.01 ? 1.628 : 1.358;
    const double n = static_cast<double>(a.size());
    const double m = static_cast<double>(b.size());
    return ks_statistic(a, b) <= c * std::sqrt((n + m) / (n * m));
}

} // namespace sewlab::testutil
