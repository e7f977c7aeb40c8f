#pragma once

#include "sewlab/errors.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sewlab {

// Drift function with certified metadata. gamma == nullopt tags a
// discontinuous (NONSMOOTH) drift for which Holder-based bounds are void.
// d > 1 equations apply the same scalar drift coordinatewise.
class DriftSpec {
public:
    enum class Family { holder_rough, lipschitz_sine, indicator, mollified_indicator, constant, generic };

    std::string label;
    std::optional<double> gamma;
    double holder_const = 0.0;
    double sup_norm = 0.0;

    double operator()(double x) const;

    // Batch evaluation; routes the canonical Holder family through the SIMD
    // kernels, everything else through the scalar callable.
    void eval_batch(const double* x, double* out, std::size_t n) const;

    Family family() const { return family_; }
    bool is_nonsmooth() const { return !gamma.has_value(); }
    // Mollification width accumulated on top of an indicator, 0 otherwise.
    double mollify_delta() const { return p2_; }

    // Checks |b| <= sup_norm and the Holder ratio <= holder_const on `pairs`
    // random pairs; throws numerical_error on violation.
    void certify(int pairs = 1000000, std::uint64_t seed = 0x5ebl) const;

private:
    Family family_ = Family::generic;
    double p0_ = 0.0, p1_ = 0.0, p2_ = 0.0;
    std::shared_ptr<const std::vector<double>> table_; // padded, holder_rough only
    std::function<double(double)> fn_;

    friend DriftSpec make_holder(double gamma);
    friend DriftSpec make_indicator(double a, double b);
    friend DriftSpec make_constant(double c);
    friend DriftSpec make_generic(std::function<double(double)> f, std::optional<double> gamma,
                                  double holder_const, double sup_norm, std::string label);
    friend DriftSpec mollify(const DriftSpec& spec, double delta);
};

// Canonical bounded gamma-Holder family. For gamma < 1 this is a normalized
// Weierstrass-type octave sum
//     b(x) = c_gamma sum_{k=-3}^{12} 2^{-gamma k} sin(2^k x),
// rough at every point and every scale down to 2^-12 (the low octaves keep
// the semigroup scaling laws clean up to t = 1), scaled so that the
// certified mesh Holder constant stays below 2 and |b| <= 1; it is served
// from a periodic cubic table, which is also what makes the Monte Carlo
// inner loops affordable. gamma = 1 is the plain first harmonic sin(x), the
// 1-Lipschitz representative. b(0) = 0 for every gamma.
DriftSpec make_holder(double gamma);

// Indicator of [a, b]; NONSMOOTH.
DriftSpec make_indicator(double a, double b);

DriftSpec make_constant(double c);

DriftSpec make_generic(std::function<double(double)> f, std::optional<double> gamma,
                       double holder_const, double sup_norm, std::string label);

// Heat-semigroup mollification P_delta b. Indicator inputs use the exact
// Gaussian-CDF form (node quadrature of a jump is piecewise constant, which
// would defeat the point of mollifying); continuous inputs go through
// Gauss-Hermite heat_apply. Metadata is preserved: the semigroup contracts
// Holder norms.
DriftSpec mollify(const DriftSpec& spec, double delta);

// Scaled octaves of the rough family, exposed for closed-form oracles:
// P_t b(x) = sum_j amplitude_j e^{-frequency_j^2 t / 2} sin(frequency_j x).
struct Octave {
    double frequency;
    double amplitude;
};
std::vector<Octave> holder_octaves(double gamma);

// Catalog addressing: "holder:0.5", "indicator:0:1", "const:0.3", "zero",
// "mollified:<base label>:<delta>".
DriftSpec parse_drift(const std::string& label);
std::vector<std::string> catalog_labels();

} // namespace sewlab
