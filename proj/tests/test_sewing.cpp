#include "sewlab/sewing.hpp"

#include "sewlab/experiments.hpp"
#include "sewlab/noise.hpp"
#include "sewlab/parallel.hpp"
#include "sewlab/rng.hpp"
#include "sewlab/semigroup.hpp"
#include "sewlab/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace sewlab;

namespace {

// path whose coordinates are analytic functions sampled on the grid
Path analytic_path(int n, std::function<double(double)> f, std::function<double(double)> g) {
    Path p(Grid(n), 2);
    for (int i = 0; i <= n; ++i) {
        p.at(i, 0) = f(p.grid.time(i));
        p.at(i, 1) = g(p.grid.time(i));
    }
    return p;
}

} // namespace

TEST_CASE("delta operator") {
    const GermContext empty{};
    const Germ additive = make_additive_germ([](double t) { return t * t * t - 2 * t; });
    CHECK(delta_germ(additive, 0.1, 0.4, 0.9, empty) == doctest::Approx(0.0).epsilon(1e-15));

    const Germ square = [](double s, double t, const GermContext&) { return (t - s) * (t - s); };
    CHECK(delta_germ(square, 0.0, 0.5, 1.0, empty) == doctest::Approx(0.5));

    CHECK_THROWS_AS(delta_germ(square, 0.5, 0.2, 1.0, empty), config_error);
}

TEST_CASE("young germ delta on the identity pair") {
    const Path p = analytic_path(16, [](double t) { return t; }, [](double t) { return t; });
    const GermContext ctx{&p};
    const Germ young = make_young_germ();
    CHECK(delta_germ(young, 0.0, 0.5, 1.0, ctx) == doctest::Approx(-0.25));
}

TEST_CASE("additive germs sew exactly at every level") {
    // g(t) = t^3 is exact in binary arithmetic on dyadic grids
    const Germ additive = make_additive_germ([](double t) { return t * t * t; });
    const GermContext empty{};
    const DyadicSums sums = dyadic_riemann(additive, 0.0, 1.0, 10, empty);
    for (double s : sums.sums) CHECK(s == 1.0);
    for (double d : sums.diffs) CHECK(d == 0.0);
}

TEST_CASE("young sums converge to the Riemann-Stieltjes integral at rate 2^-n") {
    const Path p = analytic_path(1 << 12, [](double t) { return t; }, [](double t) { return t; });
    const GermContext ctx{&p};
    const DyadicSums sums = dyadic_riemann(make_young_germ(), 0.0, 1.0, 12, ctx);
    for (int n = 0; n <= 12; ++n)
        CHECK(sums.sums[n] == doctest::Approx(0.5 * (1.0 - std::pow(2.0, -n))).epsilon(1e-12));
    for (int n = 0; n < 12; ++n)
        CHECK(sums.diffs[n] == doctest::Approx(std::pow(2.0, -n - 2)).epsilon(1e-9));
}

TEST_CASE("sewing-limit consistency against quadrature") {
    // f = sin t, g = t^2: int f dg = 2 int t sin t dt = 2 (sin 1 - cos 1)
    const int n = 1 << 14;
    const Path p = analytic_path(
        n, [](double t) { return std::sin(t); }, [](double t) { return t * t; });
    const GermContext ctx{&p};
    const DyadicSums sums = dyadic_riemann(make_young_germ(), 0.0, 1.0, 14, ctx);
    const double exact = 2.0 * (std::sin(1.0) - std::cos(1.0));
    CHECK(std::fabs(sums.sums[14] - exact) <= 1e-4);
}

TEST_CASE("shifted dyadic sums omit the first cell") {
    const GermContext empty{};
    const Germ additive = make_additive_germ([](double t) { return t * t * t; });
    const DyadicSums sums = shifted_dyadic_riemann(additive, 0.0, 1.0, 8, empty);
    for (int n = 0; n <= 8; ++n) {
        const double first = std::pow(2.0, -n);
        CHECK(sums.sums[n] == doctest::Approx(1.0 - first * first * first).epsilon(1e-14));
    }

    const Germ constant = [](double, double, const GermContext&) { return 0.5; };
    const DyadicSums csums = shifted_dyadic_riemann(constant, 0.0, 1.0, 8, empty);
    for (int n = 0; n <= 8; ++n) CHECK(csums.sums[n] == ((1 << n) - 1) * 0.5);
}

TEST_CASE("shifted young sums track the unshifted limit") {
    const Path p = analytic_path(
        1 << 10, [](double t) { return t + 0.5; }, [](double t) { return t + 0.5; });
    const GermContext ctx{&p};
    const DyadicSums plain = dyadic_riemann(make_young_germ(), 0.0, 1.0, 10, ctx);
    const DyadicSums shifted = shifted_dyadic_riemann(make_young_germ(), 0.0, 1.0, 10, ctx);
    for (int n = 0; n <= 10; ++n)
        CHECK(std::fabs(shifted.sums[n] - plain.sums[n]) <= std::pow(2.0, -n));
    CHECK(shifted.sums[10] == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("ssl pair germ zero cases") {
    const Path w = sample_bm(Grid(256), 1, SeedSpec{21}, 0);
    const GermContext ctx{&w};
    const Germ same = ssl_bm_pair_germ(make_holder(0.5), 0.3, 0.3);
    CHECK(same(0.25, 0.5, ctx) == 0.0);
    const Germ constant = ssl_bm_pair_germ(make_constant(0.7), 0.0, 0.1);
    CHECK(constant(0.25, 0.5, ctx) == 0.0);
    CHECK_THROWS_AS(ssl_bm_pair_germ(make_indicator(0, 1), 0.0, 0.1), config_error);
}

TEST_CASE("ssl pair germ crude envelope holds samplewise") {
    const DriftSpec b = make_holder(0.5);
    const double x = 0.1, y = 0.0;
    const Germ germ = ssl_bm_pair_germ(b, x, y);
    const Path w = sample_bm(Grid(256), 1, SeedSpec{22}, 5);
    const GermContext ctx{&w};
    const double envelope = 2.0 * b.holder_const * std::pow(x - y, 0.5);
    for (int i = 0; i < 16; ++i) {
        const double s = i / 16.0;
        const double t = s + 1.0 / 16.0;
        CHECK(std::fabs(germ(s, t, ctx)) <= envelope * (t - s) * (1 + 1e-12));
    }
}

TEST_CASE("ssl pair germ matches a direct heat_apply evaluation") {
    const DriftSpec b = make_holder(0.5);
    const Germ germ = ssl_bm_pair_germ(b, 0.2, -0.1);
    const Path w = sample_bm(Grid(64), 1, SeedSpec{23}, 2);
    const GermContext ctx{&w};
    const double s = 0.25, t = 0.5;
    const Quadrature& gl = gauss_legendre_01(16);
    double direct = 0.0;
    for (int j = 0; j < gl.size(); ++j) {
        const double tau = gl.nodes[j] * (t - s);
        const double ws = ctx.value_at(s);
        direct += gl.weights[j] *
                  (heat_apply([&](double u) { return b(u); }, tau, ws + 0.2) -
                   heat_apply([&](double u) { return b(u); }, tau, ws - 0.1));
    }
    direct *= (t - s);
    CHECK(germ(s, t, ctx) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("estimate_order") {
    CHECK(estimate_order({1.0, 0.5, 0.25, 0.125}).slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(estimate_order({1.0, 1.0, 1.0}).slope == doctest::Approx(0.0));
    rng::Stream gen(3, 0);
    std::vector<double> diffs;
    for (int n = 0; n < 10; ++n)
        diffs.push_back(std::pow(2.0, -0.75 * n) * (1.0 + 0.01 * (2 * gen.uniform_open() - 1)));
    const OrderFit fit = estimate_order(diffs);
    CHECK(fit.slope >= -0.78);
    CHECK(fit.slope <= -0.72);
    CHECK_THROWS_AS(estimate_order({1.0, 0.0, 0.5}), degenerate_data_error);
    CHECK_THROWS_AS(estimate_order({1.0, 0.5}), degenerate_data_error);
}

TEST_CASE("martingale-difference decay of the ssl germ") {
    // theory: L2 level differences decay like 2^(-n gamma/2) = 2^(-n/4)
    SewOptions opt;
    opt.germ = "ssl-pair";
    opt.gamma = 0.5;
    opt.x = 0.1;
    opt.y = 0.0;
    opt.max_level = 8;
    opt.paths = 512;
    opt.seed = 31;
    const SewCheckResult result = sew_check(opt);
    CHECK(result.slope <= -0.2);
    CHECK(result.theory_slope == doctest::Approx(-0.25));
}

TEST_CASE("young sewing decay on coupled fbm paths") {
    SewOptions opt;
    opt.germ = "young";
    opt.hurst = 0.7;
    opt.max_level = 8;
    opt.paths = 128;
    opt.seed = 32;
    const SewCheckResult result = sew_check(opt);
    CHECK(result.slope <= -(2 * 0.7 - 1) + 0.1);
    CHECK(result.theory_slope == doctest::Approx(-0.4));
}

TEST_CASE("ssl limit identification against the direct integral (small run)") {
    const DriftSpec b = make_holder(0.5);
    const double x = 0.1, y = 0.0;
    const Germ germ = ssl_bm_pair_germ(b, x, y);
    const int level = 10;
    const int paths = 512;
    const Grid grid(1 << level);
    std::vector<double> gap(paths);
    parallel_for(paths, [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t k = begin; k < end; ++k) {
            const Path w = sample_bm(grid, 1, SeedSpec{33}, static_cast<std::uint64_t>(k));
            const GermContext ctx{&w};
            const DyadicSums sums = dyadic_riemann(germ, 0.0, 1.0, level, ctx);
            // direct trapezoid quadrature of int (b(W+x)-b(W+y)) dr
            double direct = 0.0;
            for (int i = 0; i <= grid.n_steps; ++i) {
                const double wgt = (i == 0 || i == grid.n_steps) ? 0.5 : 1.0;
                direct += wgt * (b(w.value(i) + x) - b(w.value(i) + y));
            }
            direct *= grid.dt();
            gap[k] = sums.sums[level] - direct;
        }
    });
    const MeanSE ms = mean_se(gap);
    CHECK(std::fabs(ms.mean) <= std::max(4 * ms.se, 5e-4));
}

TEST_CASE("germ context rejects off-grid times") {
    const Path w = sample_bm(Grid(64), 1, SeedSpec{24}, 0);
    const GermContext ctx{&w};
    CHECK_THROWS_AS(ctx.value_at(0.013), config_error);
    CHECK(ctx.value_at(0.25) == w.value(16));
}
