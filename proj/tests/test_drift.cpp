#include "sewlab/drift.hpp"

#include "sewlab/rng.hpp"
#include "sewlab/semigroup.hpp"
#include "sewlab/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace sewlab;

namespace {

// max |b(x)-b(y)| / |x-y|^gamma over random pairs in [-8, 8]
double mesh_holder_ratio(const DriftSpec& b, double gamma, int pairs, std::uint64_t seed = 91) {
    rng::Stream gen(seed, 0);
    double worst = 0.0;
    for (int i = 0; i < pairs; ++i) {
        const double x = 8.0 * (2.0 * gen.uniform_open() - 1.0);
        const double y = 8.0 * (2.0 * gen.uniform_open() - 1.0);
        if (x == y) continue;
        worst = std::max(worst, std::fabs(b(x) - b(y)) / std::pow(std::fabs(x - y), gamma));
    }
    return worst;
}

} // namespace

TEST_CASE("holder family basics") {
    const DriftSpec lip = make_holder(1.0);
    CHECK(lip(0.0) == 0.0);
    CHECK(mesh_holder_ratio(lip, 1.0, 100000) <= 1.01);

    const DriftSpec half = make_holder(0.5);
    CHECK(half(0.0) == 0.0);
    CHECK(std::fabs(half(1.3)) <= 1.0);
    CHECK(mesh_holder_ratio(half, 0.5, 1000000) <= 2.0);
    CHECK_NOTHROW(half.certify(1000000));

    CHECK_THROWS_AS(make_holder(1.5), config_error);
    CHECK_THROWS_AS(make_holder(0.0), config_error);
}

TEST_CASE("holder family is rough at every dyadic scale") {
    // increments over lag h should scale like h^gamma down to the finest
    // octave, not flatten to h^1 as a piecewise-smooth wave would
    const DriftSpec half = make_holder(0.5);
    std::vector<double> lh, li;
    for (double h = 0.25; h >= 1e-3; h /= 4) {
        double worst = 0.0;
        for (int i = 0; i < 40000; ++i) {
            const double x = -4.0 + 8.0 * i / 39999.0;
            worst = std::max(worst, std::fabs(half(x + h) - half(x)));
        }
        lh.push_back(std::log(h));
        li.push_back(std::log(worst));
    }
    const double slope = ols(lh, li).slope;
    CHECK(slope >= 0.35);
    CHECK(slope <= 0.65);
}

TEST_CASE("holder family batch evaluation matches scalar calls") {
    const DriftSpec b = make_holder(0.6);
    std::vector<double> x(257), out(257);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = -20.0 + 0.155 * static_cast<double>(i);
    b.eval_batch(x.data(), out.data(), x.size());
    for (std::size_t i = 0; i < x.size(); i += 13) CHECK(out[i] == b(x[i]));
}

TEST_CASE("indicator drift") {
    const DriftSpec ind = make_indicator(0.0, 1.0);
    CHECK(ind(0.5) == 1.0);
    CHECK(ind(-0.1) == 0.0);
    CHECK(ind(1.0) == 1.0);
    CHECK(ind.is_nonsmooth());
    CHECK(ind.sup_norm == 1.0);
    CHECK_THROWS_AS(make_indicator(1.0, 1.0), config_error);
}

TEST_CASE("indicator Besov seminorm is 2^(1/p) for p=2") {
    const DriftSpec ind = make_indicator(0.0, 1.0);
    // ||f(.+h)-f||_{L2}^2 by midpoint quadrature over [-1, 2]
    double sup = 0.0;
    for (double h : {0.05, 0.1, 0.2, 0.4}) {
        const int n = 300000;
        const double a = -1.0, b = 2.0, dx = (b - a) / n;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = a + (i + 0.5) * dx;
            const double d = ind(x + h) - ind(x);
            acc += d * d;
        }
        acc *= dx;
        sup = std::max(sup, std::sqrt(acc) / std::sqrt(h));
    }
    CHECK(sup == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
}

TEST_CASE("mollified indicator is smooth with the kernel-peak derivative bound") {
    const DriftSpec smooth = mollify(make_indicator(0.0, 1.0), 0.01);
    const double peak = 1.0 / std::sqrt(2 * 3.14159265358979323846 * 0.01); // ~3.9894
    double max_fd = 0.0;
    const double delta = 1e-4;
    for (int i = 0; i <= 3000; ++i) {
        const double x = -1.0 + i * 1e-3;
        max_fd = std::max(max_fd, std::fabs(smooth(x + delta) - smooth(x)) / delta);
    }
    CHECK(max_fd <= peak * 1.01);
    CHECK(max_fd >= peak * 0.95); // the bound is sharp at the jump
    CHECK(!smooth.is_nonsmooth());
}

TEST_CASE("mollified-indicator smoothness scales like delta^(-1/2)") {
    std::vector<double> ld, lc;
    for (double delta : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const DriftSpec smooth = mollify(make_indicator(0.0, 1.0), delta);
        const double fd = 1e-5;
        double max_fd = 0.0;
        for (int i = 0; i <= 8000; ++i) {
            const double x = -0.3 + i * 2e-4;
            max_fd = std::max(max_fd, std::fabs(smooth(x + fd) - smooth(x)) / fd);
        }
        ld.push_back(std::log(delta));
        lc.push_back(std::log(max_fd));
    }
    const double slope = ols(ld, lc).slope;
    CHECK(slope >= -0.6);
    CHECK(slope <= -0.4);
}

TEST_CASE("mollify preserves constants exactly") {
    const DriftSpec c = make_constant(1.0);
    const DriftSpec mc = mollify(c, 0.3);
    for (double x : {-2.0, 0.0, 5.0}) CHECK(mc(x) == 1.0);
}

TEST_CASE("mollification contracts the Holder constant") {
    const DriftSpec rough = make_holder(0.5);
    const DriftSpec smooth = mollify(rough, 0.01);
    const double before = mesh_holder_ratio(rough, 0.5, 20000);
    const double after = mesh_holder_ratio(smooth, 0.5, 20000);
    CHECK(after <= before * (1.0 + 1e-9));
    CHECK(smooth.gamma == rough.gamma);
    CHECK(smooth.sup_norm == rough.sup_norm);
}

TEST_CASE("mollification converges uniformly for continuous drifts") {
    const DriftSpec rough = make_holder(0.5);
    double prev = 1e9;
    for (double delta : {0.1, 0.01, 0.001}) {
        const DriftSpec smooth = mollify(rough, delta);
        double sup = 0.0;
        for (int i = 0; i <= 400; ++i) {
            const double x = -4.0 + i * 0.02;
            sup = std::max(sup, std::fabs(smooth(x) - rough(x)));
        }
        CHECK(sup < prev);
        prev = sup;
    }
    CHECK(prev <= 0.5); // [b] delta^{gamma/2} scale at delta = 1e-3
    CHECK_THROWS_AS(mollify(rough, 0.0), config_error);
}

TEST_CASE("mollification composes exactly on indicators") {
    const DriftSpec once = mollify(make_indicator(0.0, 1.0), 0.1);
    const DriftSpec twice = mollify(mollify(make_indicator(0.0, 1.0), 0.04), 0.06);
    for (double x : {-0.5, 0.2, 0.9, 1.4}) CHECK(once(x) == doctest::Approx(twice(x)).epsilon(1e-14));
    CHECK(once.mollify_delta() == doctest::Approx(0.1));
}

TEST_CASE("drift label parsing") {
    CHECK(parse_drift("holder:0.5").label == "holder:0.5");
    CHECK(parse_drift("zero")(1.23) == 0.0);
    CHECK(parse_drift("const:0.7")(-3.0) == 0.7);
    CHECK(parse_drift("indicator:0:1")(0.4) == 1.0);
    const DriftSpec moll = parse_drift("mollified:indicator:0:1:0.01");
    CHECK(moll.family() == DriftSpec::Family::mollified_indicator);
    CHECK(moll.mollify_delta() == doctest::Approx(0.01));

    CHECK_THROWS_WITH_AS(parse_drift("holder:1.5"), doctest::Contains("gamma out of (0,1]"),
                         config_error);
    CHECK_THROWS_AS(parse_drift("wiggle:1"), config_error);
    CHECK_THROWS_AS(parse_drift("indicator:1"), config_error);
    CHECK_THROWS_AS(parse_drift("holder:abc"), config_error);
}

TEST_CASE("certification rejects wrong metadata") {
    DriftSpec lying = make_generic([](double x) { return std::sin(3 * x); }, 1.0,
                                   /*holder_const=*/0.5, /*sup_norm=*/1.0, "liar");
    CHECK_THROWS_AS(lying.certify(20000), numerical_error);
    DriftSpec low_sup = make_generic([](double x) { return std::sin(x); }, 1.0, 1.0,
                                     /*sup_norm=*/0.5, "low-sup");
    CHECK_THROWS_AS(low_sup.certify(20000), numerical_error);
}

TEST_CASE("generic mollification goes through the heat semigroup") {
    const DriftSpec rough = make_holder(0.5);
    const DriftSpec smooth = mollify(rough, 0.05);
    for (double x : {-1.0, 0.3, 2.0}) {
        const double direct = heat_apply([&](double y) { return rough(y); }, 0.05, x);
        CHECK(smooth(x) == doctest::Approx(direct).epsilon(1e-12));
    }
}
