// AVX2 kernel variants. This translation unit is the only one compiled with
// -mavx2 -mfma; execution is gated behind a CPUID check in avx2_table().

#include "sewlab/kernels.hpp"

#include <cmath>
#include <cstddef>

#if defined(__x86_64__) && defined(SEWLAB_BUILD_AVX2)
#include <immintrin.h>

namespace sewlab::kernels::detail {

namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    if (i + 4 <= n) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        i += 4;
    }
    const __m256d acc = _mm256_add_pd(acc0, acc1);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double result = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) result += a[i] * b[i];
    return result;
}

double max_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d best = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        best = _mm256_max_pd(best, _mm256_andnot_pd(sign_mask, d));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, best);
    double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
    for (; i < n; ++i) {
        const double d = std::fabs(a[i] - b[i]);
        if (d > m) m = d;
    }
    return m;
}

// sin on 4 lanes. Cody-Waite reduction by pi/2 (fdlibm split constants) plus
// the fdlibm kernel polynomials; accurate to ~1 ulp for |x| <= 2^20, far
// beyond the |x| <~ 100 range the samplers and quadratures produce.
constexpr double kInvPio2 = 6.36619772367581382433e-01;
constexpr double kPio2_1 = 1.57079632673412561417e+00;
constexpr double kPio2_1t = 6.07710050650619224932e-11;

constexpr double kS1 = -1.66666666666666324348e-01;
constexpr double kS2 = 8.33333333332248946124e-03;
constexpr double kS3 = -1.98412698298579493134e-04;
constexpr double kS4 = 2.75573137070700676789e-06;
constexpr double kS5 = -2.50507602534068634195e-08;
constexpr double kS6 = 1.58969099521155010221e-10;

constexpr double kC1 = 4.16666666666666019037e-02;
constexpr double kC2 = -1.38888888888741095749e-03;
constexpr double kC3 = 2.48015872894767294178e-05;
constexpr double kC4 = -2.75573143513906633035e-07;
constexpr double kC5 = 2.08757232129817482790e-09;
constexpr double kC6 = -1.13596475577881948265e-11;

inline __m256d sin4(__m256d x) {
    const __m256d kd = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kInvPio2)),
                                       _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    // two-stage Cody-Waite: r = (x - k*p1) - k*p1t, each step a single
    // FMA rounding; |k| stays far below 2^20 so k*p1 is exact
    __m256d r = _mm256_fnmadd_pd(kd, _mm256_set1_pd(kPio2_1), x);
    r = _mm256_fnmadd_pd(kd, _mm256_set1_pd(kPio2_1t), r);

    const __m256d z = _mm256_mul_pd(r, r);

    // sin kernel: r + r*z*(S1 + z*(...))
    __m256d sp = _mm256_set1_pd(kS6);
    sp = _mm256_fmadd_pd(sp, z, _mm256_set1_pd(kS5));
    sp = _mm256_fmadd_pd(sp, z, _mm256_set1_pd(kS4));
    sp = _mm256_fmadd_pd(sp, z, _mm256_set1_pd(kS3));
    sp = _mm256_fmadd_pd(sp, z, _mm256_set1_pd(kS2));
    sp = _mm256_fmadd_pd(sp, z, _mm256_set1_pd(kS1));
    const __m256d sinp = _mm256_fmadd_pd(_mm256_mul_pd(r, z), sp, r);

    // cos kernel: 1 - z/2 + z*z*(C1 + z*(...))
    __m256d cp = _mm256_set1_pd(kC6);
    cp = _mm256_fmadd_pd(cp, z, _mm256_set1_pd(kC5));
    cp = _mm256_fmadd_pd(cp, z, _mm256_set1_pd(kC4));
    cp = _mm256_fmadd_pd(cp, z, _mm256_set1_pd(kC3));
    cp = _mm256_fmadd_pd(cp, z, _mm256_set1_pd(kC2));
    cp = _mm256_fmadd_pd(cp, z, _mm256_set1_pd(kC1));
    __m256d cosp = _mm256_fmadd_pd(_mm256_mul_pd(z, z), cp,
                                   _mm256_fnmadd_pd(z, _mm256_set1_pd(0.5), _mm256_set1_pd(1.0)));

    const __m128i ki = _mm256_cvtpd_epi32(kd);
    const __m128i q = _mm_and_si128(ki, _mm_set1_epi32(3));
    const __m128i odd32 = _mm_cmpeq_epi32(_mm_and_si128(q, _mm_set1_epi32(1)), _mm_set1_epi32(1));
    const __m128i neg32 = _mm_cmpeq_epi32(_mm_and_si128(q, _mm_set1_epi32(2)), _mm_set1_epi32(2));
    const __m256d odd_mask = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(odd32));
    const __m256d neg_mask = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(neg32));

    __m256d value = _mm256_blendv_pd(sinp, cosp, odd_mask);
    value = _mm256_xor_pd(value, _mm256_and_pd(neg_mask, _mm256_set1_pd(-0.0)));
    return value;
}

void sin_array_avx2(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, sin4(_mm256_loadu_pd(x + i)));
    if (i < n) {
        alignas(32) double buf[4] = {0, 0, 0, 0};
        for (std::size_t j = i; j < n; ++j) buf[j - i] = x[j];
        alignas(32) double res[4];
        _mm256_store_pd(res, sin4(_mm256_load_pd(buf)));
        for (std::size_t j = i; j < n; ++j) out[j] = res[j - i];
    }
}

// Mirrors periodic_cubic_scalar operation for operation (no FMA contraction),
// so the two backends agree bit for bit; the gathers carry the speedup.
void periodic_cubic_avx2(const double* x, double* out, std::size_t n, const double* values, int m,
                         double inv_step) {
    const __m256d md = _mm256_set1_pd(static_cast<double>(m));
    const __m256d inv = _mm256_set1_pd(inv_step);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d three = _mm256_set1_pd(3.0);
    const __m256d four = _mm256_set1_pd(4.0);
    const __m256d five = _mm256_set1_pd(5.0);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d u = _mm256_mul_pd(_mm256_loadu_pd(x + i), inv);
        const __m256d k = _mm256_floor_pd(_mm256_div_pd(u, md));
        u = _mm256_sub_pd(u, _mm256_mul_pd(k, md));
        u = _mm256_blendv_pd(u, _mm256_setzero_pd(), _mm256_cmp_pd(u, md, _CMP_GE_OQ));
        const __m128i idx = _mm256_cvttpd_epi32(u);
        const __m256d t = _mm256_sub_pd(u, _mm256_cvtepi32_pd(idx));
        const __m256d p0 = _mm256_i32gather_pd(values, idx, 8);
        const __m256d p1 = _mm256_i32gather_pd(values + 1, idx, 8);
        const __m256d p2 = _mm256_i32gather_pd(values + 2, idx, 8);
        const __m256d p3 = _mm256_i32gather_pd(values + 3, idx, 8);
        // same association order as the scalar kernel: a = ((-p0+3p1)-3p2)+p3,
        // b = ((2p0-5p1)+4p2)-p3, evaluated without FMA contraction
        const __m256d neg_p0 = _mm256_sub_pd(_mm256_setzero_pd(), p0);
        const __m256d a = _mm256_add_pd(
            _mm256_sub_pd(_mm256_add_pd(neg_p0, _mm256_mul_pd(three, p1)), _mm256_mul_pd(three, p2)),
            p3);
        const __m256d b = _mm256_sub_pd(
            _mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(two, p0), _mm256_mul_pd(five, p1)),
                          _mm256_mul_pd(four, p2)),
            p3);
        const __m256d c = _mm256_sub_pd(p2, p0);
        __m256d poly = _mm256_add_pd(c, _mm256_mul_pd(t, _mm256_add_pd(b, _mm256_mul_pd(t, a))));
        poly = _mm256_mul_pd(_mm256_mul_pd(half, t), poly);
        _mm256_storeu_pd(out + i, _mm256_add_pd(p1, poly));
    }
    if (i < n) {
        // scalar tail, identical arithmetic
        for (; i < n; ++i) {
            double u = x[i] * inv_step;
            u -= std::floor(u / m) * m;
            if (u >= static_cast<double>(m)) u = 0.0;
            const int idx = static_cast<int>(u);
            const double t = u - idx;
            const double* p = values + idx;
            const double a = -p[0] + 3.0 * p[1] - 3.0 * p[2] + p[3];
            const double b = 2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3];
            const double c = p[2] - p[0];
            out[i] = p[1] + 0.5 * t * (c + t * (b + t * a));
        }
    }
}

} // namespace

const KernelTable* avx2_table() {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
    static const KernelTable table{dot_avx2, max_abs_diff_avx2, sin_array_avx2,
                                   periodic_cubic_avx2};
    return &table;
}

} // namespace sewlab::kernels::detail

#else

namespace sewlab::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
} // namespace sewlab::kernels::detail

#endif
