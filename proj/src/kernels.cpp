#include "sewlab/kernels.hpp"

#include "sewlab/errors.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace sewlab::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::fabs(a[i] - b[i]);
        if (d > m) m = d;
    }
    return m;
}

void sin_array_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::sin(x[i]);
}

void periodic_cubic_scalar(const double* x, double* out, std::size_t n, const double* values,
                           int m, double inv_step) {
    const double md = static_cast<double>(m);
    for (std::size_t i = 0; i < n; ++i) {
        double u = x[i] * inv_step;
        u -= std::floor(u / md) * md; // wrap into [0, m)
        if (u >= md) u = 0.0;         // guard the floor rounding edge
        const int idx = static_cast<int>(u);
        const double t = u - idx;
        const double* p = values + idx; // p[0..3] = y[idx-1..idx+2]
        const double a = -p[0] + 3.0 * p[1] - 3.0 * p[2] + p[3];
        const double b = 2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3];
        const double c = p[2] - p[0];
        out[i] = p[1] + 0.5 * t * (c + t * (b + t * a));
    }
}

Backend pick_default_backend() {
    const char* env = std::getenv("SEWLAB_SIMD");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (detail::avx2_table() == nullptr)
                throw config_error("SEWLAB_SIMD=avx2 requested but AVX2 is not available");
            return Backend::avx2;
        }
        throw config_error(std::string("unknown SEWLAB_SIMD value '") + env + "' (want scalar|avx2)");
    }
    return detail::avx2_table() != nullptr ? Backend::avx2 : Backend::scalar;
}

std::atomic<const detail::KernelTable*> g_active{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

const detail::KernelTable* active_table() {
    const detail::KernelTable* t = g_active.load(std::memory_order_acquire);
    if (t == nullptr) {
        const Backend b = pick_default_backend();
        t = (b == Backend::avx2) ? detail::avx2_table() : &detail::scalar_table();
        g_backend.store(b, std::memory_order_relaxed);
        g_active.store(t, std::memory_order_release);
    }
    return t;
}

} // namespace

namespace detail {
const KernelTable& scalar_table() {
    static const KernelTable table{dot_scalar, max_abs_diff_scalar, sin_array_scalar,
                                   periodic_cubic_scalar};
    return table;
}
} // namespace detail

Backend active_backend() {
    active_table();
    return g_backend.load(std::memory_order_relaxed);
}

bool avx2_supported() { return detail::avx2_table() != nullptr; }

void set_backend(Backend b) {
    if (b == Backend::avx2) {
        const detail::KernelTable* t = detail::avx2_table();
        if (t == nullptr) throw config_error("AVX2 backend is not available on this machine");
        g_active.store(t, std::memory_order_release);
    } else {
        g_active.store(&detail::scalar_table(), std::memory_order_release);
    }
    g_backend.store(b, std::memory_order_relaxed);
}

std::string backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

double dot(const double* a, const double* b, std::size_t n) { return active_table()->dot(a, b, n); }

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    return active_table()->max_abs_diff(a, b, n);
}

void sin_array(const double* x, double* out, std::size_t n) { active_table()->sin_array(x, out, n); }

void periodic_cubic(const double* x, double* out, std::size_t n, const double* values, int m,
                    double inv_step) {
    active_table()->periodic_cubic(x, out, n, values, m, inv_step);
}

double pairwise_sum(const double* a, std::size_t n) {
    if (n <= 16) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += a[i];
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

} // namespace sewlab::kernels
