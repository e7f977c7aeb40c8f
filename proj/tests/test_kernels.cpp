#include "sewlab/kernels.hpp"

#include "sewlab/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace sewlab;

namespace {

std::vector<double> random_array(std::size_t n, double span, std::uint64_t seed) {
    rng::Stream gen(seed, 0);
    std::vector<double> out(n);
    for (auto& v : out) v = span * (2.0 * gen.uniform_open() - 1.0);
    return out;
}

struct BackendGuard {
    kernels::Backend saved;
    BackendGuard() : saved(kernels::active_backend()) {}
    ~BackendGuard() { kernels::set_backend(saved); }
};

} // namespace

TEST_CASE("pairwise sum matches plain summation") {
    const auto a = random_array(1001, 1.0, 1);
    double plain = 0.0;
    for (double v : a) plain += v;
    CHECK(kernels::pairwise_sum(a.data(), a.size()) == doctest::Approx(plain).epsilon(1e-13));
}

TEST_CASE("scalar and simd backends agree") {
    if (!kernels::avx2_supported()) {
        MESSAGE("AVX2 unavailable; dispatch test degenerates to scalar-only");
        return;
    }
    BackendGuard guard;
    const std::size_t n = 4099; // odd length exercises the tail loops
    const auto a = random_array(n, 100.0, 2);
    const auto b = random_array(n, 100.0, 3);

    // a small periodic table (a smooth wave) for the interpolation kernel
    const int m = 256;
    std::vector<double> padded(m + 3);
    auto wave = [](double u) { return std::sin(u) + 0.3 * std::cos(3 * u); };
    for (int i = 0; i < m; ++i) padded[i + 1] = wave(2 * 3.14159265358979323846 * i / m);
    padded[0] = padded[m];
    padded[m + 1] = padded[1];
    padded[m + 2] = padded[2];
    const double inv_step = m / (2 * 3.14159265358979323846);

    kernels::set_backend(kernels::Backend::scalar);
    const double dot_s = kernels::dot(a.data(), b.data(), n);
    const double mad_s = kernels::max_abs_diff(a.data(), b.data(), n);
    std::vector<double> sin_s(n), cub_s(n);
    kernels::sin_array(a.data(), sin_s.data(), n);
    kernels::periodic_cubic(a.data(), cub_s.data(), n, padded.data(), m, inv_step);

    kernels::set_backend(kernels::Backend::avx2);
    const double dot_v = kernels::dot(a.data(), b.data(), n);
    const double mad_v = kernels::max_abs_diff(a.data(), b.data(), n);
    std::vector<double> sin_v(n), cub_v(n);
    kernels::sin_array(a.data(), sin_v.data(), n);
    kernels::periodic_cubic(a.data(), cub_v.data(), n, padded.data(), m, inv_step);

    CHECK(dot_v == doctest::Approx(dot_s).epsilon(1e-12));
    CHECK(mad_v == mad_s);   // max/abs are order-exact
    CHECK(cub_v == cub_s);   // interpolation uses matched arithmetic order
    for (std::size_t i = 0; i < n; i += 7) CHECK(std::fabs(sin_v[i] - sin_s[i]) <= 1e-15);
}

TEST_CASE("vector sine is accurate against libm") {
    if (!kernels::avx2_supported()) return;
    BackendGuard guard;
    kernels::set_backend(kernels::Backend::avx2);
    rng::Stream gen(17, 0);
    std::vector<double> x(4096), y(4096);
    for (auto& v : x) v = 1000.0 * (2.0 * gen.uniform_open() - 1.0);
    // include near-multiples of pi/2 where reduction is delicate
    for (int k = 0; k < 64; ++k) x[k] = k * 1.5707963267948966;
    kernels::sin_array(x.data(), y.data(), x.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::fabs(y[i] - std::sin(x[i])));
    CHECK(worst <= 1e-15);
}

TEST_CASE("periodic cubic interpolation reproduces smooth waves") {
    const int m = 1024;
    const double period = 2 * 3.14159265358979323846;
    std::vector<double> padded(m + 3);
    auto wave = [](double u) { return std::sin(u) + 0.3 * std::cos(3 * u); };
    for (int i = 0; i < m; ++i) padded[i + 1] = wave(period * i / m);
    padded[0] = padded[m];
    padded[m + 1] = padded[1];
    padded[m + 2] = padded[2];

    rng::Stream gen(5, 0);
    std::vector<double> x(512), out(512);
    for (auto& v : x) v = 40.0 * (2.0 * gen.uniform_open() - 1.0); // wraps many periods
    kernels::periodic_cubic(x.data(), out.data(), x.size(), padded.data(), m, m / period);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::fabs(out[i] - wave(x[i])));
    CHECK(worst <= 2e-6); // third-order accurate for smooth data

    // reproduces the node values
    const double node = 7.0 * period / m;
    double v = 0.0;
    kernels::periodic_cubic(&node, &v, 1, padded.data(), m, m / period);
    CHECK(v == doctest::Approx(padded[8]).epsilon(1e-12));
}
