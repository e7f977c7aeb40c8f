#pragma once

#include "sewlab/drift.hpp"
#include "sewlab/euler.hpp"
#include "sewlab/noise.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace sewlab {

// Log-log regression record; the acceptance currency.
struct RateFit {
    std::vector<int> n_list;
    std::vector<double> error_norms;
    std::vector<double> stderrs;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int m = 2;
    int paths = 0;

    bool has_theory = false;
    double theory_slope = 0.0;
    bool regime_ok = true;        // theorem hypotheses satisfied
    std::string regime_note;      // human-readable flag when they are not
    bool degenerate = false;      // all-zero errors; no fit was performed

    // Pre-asymptotic shedding: when r^2 < 0.98 the two smallest n are
    // dropped and the fit repeated once; both fits are kept.
    bool shed = false;
    double slope_all = 0.0;
    double intercept_all = 0.0;
    double r_squared_all = 0.0;
};

// OLS on (log n, log error) with the shedding rule above. Throws
// degenerate_data_error for fewer than 4 points or nonpositive errors.
RateFit fit_rate(const std::vector<int>& n_list, const std::vector<double>& error_norms);

struct RateOptions {
    std::vector<int> n_list{64, 128, 256, 512, 1024};
    int n_ref = 16384;
    int m = 2;
    int paths = 4096;
    std::uint64_t seed = 2025;
};

// Strong Euler rate: L_m norms over paths of the coupled sup error per n,
// log-log fitted. Theory slope -(1/2+gamma/2) under BM, -(1/2+gamma/alpha)
// under alpha-stable noise in the regime gamma > 1 - alpha/2.
RateFit euler_rate(const DriftSpec& drift, const NoiseModel& noise, const RateOptions& opt);

// Occupation-functional rate: errors |int_0^1 (f(Z_r) - f(Z_{kappa_n(r)})) dr|
// with the time integral on the reference grid and Z the raw noise.
RateFit occupation_rate(const DriftSpec& f, const NoiseModel& noise, const RateOptions& opt);

struct HolderEstimate {
    double exponent = 0.0;
    long long pairs_used = 0;
    double h_min = 0.0;
    double h_max = 0.0;
    bool zero_increments = false; // exponent pinned at the cap
    std::vector<double> h_list;   // dyadic spacings
    std::vector<double> mean_inc; // mean |F(x+h) - F(x)| per spacing
    std::vector<double> mean_inc_se;
};
inline constexpr double kHolderEstimateCap = 1.5;

struct AveragingOptions {
    int x_points = 256;
    int paths = 2048;
    int n_time = 2048;
    std::uint64_t seed = 2025;
};

// Regularity gain of the averaging operator x -> int_0^1 b(B^H_r + x) dr:
// Holder exponent of the x-profile estimated from shared-path increments
// over dyadic spacings.
HolderEstimate averaging_probe(const DriftSpec& b, double hurst, const AveragingOptions& opt);

// Scalar time series over a common grid, one row per path.
struct SeriesEnsemble {
    Grid grid;
    int paths = 0;
    std::vector<double> values; // [paths][n_points]

    SeriesEnsemble() = default;
    SeriesEnsemble(const Grid& g, int p)
        : grid(g), paths(p), values(static_cast<std::size_t>(p) * g.n_points(), 0.0) {}
    double& at(int path, int i) { return values[static_cast<std::size_t>(path) * grid.n_points() + i]; }
    double at(int path, int i) const {
        return values[static_cast<std::size_t>(path) * grid.n_points() + i];
    }
};

// Plug-in estimate of [f]_{C^tau L_m}: sup over grid pairs (thinned by
// `thin`) of the Monte Carlo L_m norm of increments over (t-s)^tau. A lower
// bound to the true sup by construction.
double holder_lm_seminorm(const SeriesEnsemble& ensemble, double tau, int m, int thin = 4);

// Adapted functional evaluated along a simulated noise path, exposed through
// a Markov state so that conditional laws can be restarted mid-flight.
// Contract: state sits at t_j when value(state, j) is read; advance moves it
// to t_{j+1} using the noise increment dz over [t_j, t_{j+1}].
class StepFunctional {
public:
    virtual ~StepFunctional() = default;
    virtual std::vector<double> initial_state() const = 0;
    virtual void advance(std::vector<double>& state, int step_index, double dz) const = 0;
    virtual double value(const std::vector<double>& state, int step_index) const = 0;
};

// f = the driving noise itself.
std::unique_ptr<StepFunctional> make_noise_value_functional();
// f_t = g(t), deterministic.
std::unique_ptr<StepFunctional> make_deterministic_functional(std::function<double(double)> g,
                                                              int n_sim);
// f_t = phi^n_t - phi^n_{kappa_n(t)}, the drift-part gap of the Euler scheme.
std::unique_ptr<StepFunctional> make_euler_gap_functional(DriftSpec drift, int n_coarse, int n_sim,
                                                          double x0 = 0.0);
// f_t = int_0^t (f(Z_r) - f(Z_{kappa_n(r)})) dr, the compensated occupation
// integral.
std::unique_ptr<StepFunctional> make_occupation_gap_functional(DriftSpec f, int n_coarse,
                                                               int n_sim);

struct ConditionalOptions {
    int outer_paths = 512;
    int restart_paths = 256;
    int n_sim = 1024;
    int mesh_stride = 0; // 0: pick ~8 s-points
    std::uint64_t seed = 2025;
};

// Conditional seminorm sup ||f_t - E^s f_t||_m / (t-s)^tau over a coarse
// (s,t) mesh, with E^s estimated by restarting the Markov driver from the
// state observed at s (restart_paths fresh substreams). FBM is refused.
double conditional_seminorm(const NoiseModel& model, const StepFunctional& functional, double tau,
                            int m, const ConditionalOptions& opt);

struct MomentGrowth {
    std::vector<int> m_list;
    std::vector<double> norms; // ||sup_t |A_t|||_{L_m}
    std::vector<double> norm_se;
    double gamma_hat = 0.0;    // uniform bound estimate of E^s|A_t - A_s|
};

struct JnOptions {
    int n = 256;
    std::vector<int> m_list{2, 4, 8};
    int paths = 2048;
    int restart_paths = 256;
    int sim_factor = 4; // fine grid n_sim = sim_factor * n
    std::uint64_t seed = 2025;
};

// Moment-growth diagnostic for A_t = int_0^t (f(L_r) - f(L_{kappa_n(r)})) dr
// under alpha-stable noise: nested-MC estimate of the uniform conditional
// bound, plus L_m norms of the running sup for each m.
MomentGrowth jn_check(const DriftSpec& f, double alpha, const JnOptions& opt);

struct CouplingSweep {
    std::vector<double> lambda_list;
    std::vector<double> mean_sup_dist;
    std::vector<double> sup_dist_se;
    std::vector<double> kl_estimate; // (1/2) lambda^2 int_0^1 E|X - Xt|^2 dt
    std::vector<double> tv_bound;    // min(1, sqrt(kl/2))
};

struct CouplingOptions {
    double delta_mollify = 0.0; // b_n = P_delta b; 0 keeps b_n = b
    std::vector<double> lambda_list{1, 2, 4, 8, 16};
    int paths = 2048;
    int n_sim = 4096;
    // grid refinement for X's drift updates; 1 couples X and X~ on the same
    // fine grid, making the b_n = b case exactly zero
    int ref_factor = 1;
    std::uint64_t seed = 2025;
};

// Feedback-coupling sweep: X' = b(X) + noise on the fine grid, auxiliary
// X~' = b_n(X~) + lambda (X - X~) + same noise, swept over lambda. Throws a
// step-size error when lambda/n_sim > 0.5.
CouplingSweep coupling_sweep(const DriftSpec& b, const CouplingOptions& opt);

// Dyadic sewing-decay experiment over a path ensemble: Monte Carlo L2 norms
// of the level differences A^{(n+1)} - A^{(n)} and their fitted decay order.
struct SewOptions {
    std::string germ = "young"; // "young" (fBM pair) or "ssl-pair" (BM germ)
    double hurst = 0.7;         // young
    double gamma = 0.5;         // ssl-pair drift regularity
    double x = 0.1, y = 0.0;    // ssl-pair shifts
    int max_level = 10;
    int paths = 256;
    std::uint64_t seed = 2025;
};

struct SewCheckResult {
    std::vector<double> diff_l2; // per level 0..max_level-1
    std::vector<double> diff_se;
    double slope = 0.0;
    double rms_residual = 0.0;
    double theory_slope = 0.0;
    int paths = 0;
};

SewCheckResult sew_check(const SewOptions& opt);

// Theory-slope bookkeeping shared by the rate experiments and the CLI.
struct TheoryInfo {
    bool has_slope = false;
    double slope = 0.0;
    bool regime_ok = true;
    std::string note;
};
TheoryInfo euler_theory(const DriftSpec& drift, const NoiseModel& noise);
TheoryInfo occupation_theory(const DriftSpec& f, const NoiseModel& noise);

} // namespace sewlab
