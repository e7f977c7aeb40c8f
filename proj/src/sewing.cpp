#include "sewlab/sewing.hpp"

#include "sewlab/kernels.hpp"
#include "sewlab/semigroup.hpp"

#include <cmath>

namespace sewlab {

double GermContext::value_at(double t, int coord) const {
    if (path == nullptr) throw config_error("GermContext: no path attached");
    const double u = t * path->grid.n_steps;
    const long long idx = std::llround(u);
    if (std::fabs(u - static_cast<double>(idx)) > 1e-6 || idx < 0 || idx > path->grid.n_steps)
        throw config_error("GermContext: time " + std::to_string(t) + " is not a grid point");
    return path->at(static_cast<int>(idx), coord);
}

double delta_germ(const Germ& germ, double s, double u, double t, const GermContext& ctx) {
    if (!(s < u && u < t)) throw config_error("delta_germ: need s < u < t");
    return germ(s, t, ctx) - germ(s, u, ctx) - germ(u, t, ctx);
}

namespace {

DyadicSums dyadic_sums_impl(const Germ& germ, double S, double T, int max_level,
                            const GermContext& ctx, bool shifted) {
    if (!(S < T)) throw config_error("dyadic_riemann: need S < T");
    if (max_level < 0 || max_level > 20)
        throw config_error("dyadic_riemann: max_level must lie in [0,20]");
    DyadicSums out;
    out.max_level = max_level;
    out.sums.resize(max_level + 1);
    for (int n = 0; n <= max_level; ++n) {
        const long long cells = 1LL << n;
        const double h = (T - S) / static_cast<double>(cells);
        double acc = 0.0;
        for (long long i = shifted ? 1 : 0; i < cells; ++i) {
            const double a = S + h * static_cast<double>(i);
            const double b = (i == cells - 1) ? T : S + h * static_cast<double>(i + 1);
            acc += germ(a, b, ctx);
        }
        out.sums[n] = acc;
    }
    out.diffs.resize(max_level);
    for (int n = 0; n < max_level; ++n) out.diffs[n] = std::fabs(out.sums[n + 1] - out.sums[n]);
    return out;
}

} // namespace

DyadicSums dyadic_riemann(const Germ& germ, double S, double T, int max_level,
                          const GermContext& ctx) {
    return dyadic_sums_impl(germ, S, T, max_level, ctx, false);
}

DyadicSums shifted_dyadic_riemann(const Germ& germ, double S, double T, int max_level,
                                  const GermContext& ctx) {
    return dyadic_sums_impl(germ, S, T, max_level, ctx, true);
}

Germ make_additive_germ(std::function<double(double)> g) {
    return [g = std::move(g)](double s, double t, const GermContext&) { return g(t) - g(s); };
}

Germ make_young_germ(int f_coord, int g_coord) {
    return [f_coord, g_coord](double s, double t, const GermContext& ctx) {
        return ctx.value_at(s, f_coord) * (ctx.value_at(t, g_coord) - ctx.value_at(s, g_coord));
    };
}

Germ ssl_bm_pair_germ(const DriftSpec& b, double x, double y, int time_nodes, int heat_nodes) {
    if (b.is_nonsmooth())
        throw config_error("ssl_bm_pair_germ: drift must carry Holder metadata");
    const Quadrature& gl = gauss_legendre_01(time_nodes);
    const Quadrature& gh = gauss_hermite(heat_nodes);

    // weights for the fused double quadrature, one entry per (time node,
    // heat node) pair
    std::vector<double> fused(static_cast<std::size_t>(time_nodes) * heat_nodes);
    for (int j = 0; j < time_nodes; ++j)
        for (int k = 0; k < heat_nodes; ++k)
            fused[static_cast<std::size_t>(j) * heat_nodes + k] = gl.weights[j] * gh.weights[k];

    return [b, x, y, time_nodes, heat_nodes, &gl, &gh,
            fused = std::move(fused)](double s, double t, const GermContext& ctx) {
        if (x == y) return 0.0;
        if (b.family() == DriftSpec::Family::constant) return 0.0;
        const double w = ctx.value_at(s);
        const double h = t - s;
        const std::size_t block = static_cast<std::size_t>(time_nodes) * heat_nodes;

        thread_local std::vector<double> args, vals;
        args.resize(2 * block);
        vals.resize(2 * block);
        for (int j = 0; j < time_nodes; ++j) {
            const double c = std::sqrt(2.0 * gl.nodes[j] * h);
            double* ax = args.data() + static_cast<std::size_t>(j) * heat_nodes;
            double* ay = ax + block;
            for (int k = 0; k < heat_nodes; ++k) {
                const double shift = c * gh.nodes[k];
                ax[k] = w + x - shift;
                ay[k] = w + y - shift;
            }
        }
        b.eval_batch(args.data(), vals.data(), 2 * block);
        const double px = kernels::dot(fused.data(), vals.data(), block);
        const double py = kernels::dot(fused.data(), vals.data() + block, block);
        return h * (px - py);
    };
}

OrderFit estimate_order(const std::vector<double>& diff_norms) {
    const int n = static_cast<int>(diff_norms.size());
    if (n < 3) throw degenerate_data_error("estimate_order: need at least 3 levels");
    for (double d : diff_norms)
        if (!(d > 0.0)) throw degenerate_data_error("estimate_order: nonpositive difference norm");

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double xi = static_cast<double>(i);
        const double yi = std::log2(diff_norms[i]);
        sx += xi;
        sy += yi;
        sxx += xi * xi;
        sxy += xi * yi;
    }
    OrderFit fit;
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = std::log2(diff_norms[i]) - (fit.intercept + fit.slope * i);
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / n);
    return fit;
}

} // namespace sewlab
