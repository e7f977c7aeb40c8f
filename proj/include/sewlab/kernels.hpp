#pragma once

#include <cstddef>
#include <string>

namespace sewlab::kernels {

// Inner-loop kernels exist in two flavors: a scalar reference implementation
// and an AVX2 variant. The active backend is picked once at startup (CPUID),
// can be forced with SEWLAB_SIMD=scalar|avx2 or set_backend(), and is
// reported in every result record. Within one backend all kernels are
// deterministic; the two backends agree to ~1 ulp (see tests/test_kernels).
enum class Backend { scalar, avx2 };

Backend active_backend();
void set_backend(Backend b); // throws config_error if the backend is unavailable
bool avx2_supported();
std::string backend_name(Backend b);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// max_i |a[i]-b[i]|; bit-identical across backends.
double max_abs_diff(const double* a, const double* b, std::size_t n);

// out[i] = sin(x[i])
void sin_array(const double* x, double* out, std::size_t n);

// Catmull-Rom interpolation on a uniform periodic table: values[] holds
// m + 3 entries with one ghost sample in front (values[0] = y[m-1]) and two
// behind (values[m+1..m+2] = y[0..1]); inv_step = m / period. The hot path
// of the tabulated rough-drift family.
void periodic_cubic(const double* x, double* out, std::size_t n, const double* values, int m,
                    double inv_step);

// Deterministic pairwise-tree sum. Not dispatched: the reduction order is
// fixed so that Monte Carlo statistics are independent of both the worker
// count and the SIMD backend.
double pairwise_sum(const double* a, std::size_t n);

namespace detail {
struct KernelTable {
    double (*dot)(const double*, const double*, std::size_t) = nullptr;
    double (*max_abs_diff)(const double*, const double*, std::size_t) = nullptr;
    void (*sin_array)(const double*, double*, std::size_t) = nullptr;
    void (*periodic_cubic)(const double*, double*, std::size_t, const double*, int, double) = nullptr;
};
const KernelTable& scalar_table();
// Returns nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_table();
} // namespace detail

} // namespace sewlab::kernels
