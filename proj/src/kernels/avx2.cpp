// Compiled with -mavx2 -mfma. Only reached after a cpuid check, so nothing
// in here may be inlined into code that runs unconditionally.
#include <immintrin.h>

#include "lolo/kernels.hpp"

namespace lolo::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
    // (l0 + l1) + (l2 + l3), matching the scalar lane combination.
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    double l[4];
    _mm_storeu_pd(l, lo);
    _mm_storeu_pd(l + 2, hi);
    return (l[0] + l[1]) + (l[2] + l[3]);
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double total = hsum(acc);
    for (; i < n; ++i) total += a[i] * b[i];
    return total;
}

double weighted_dot(const double* w, const double* a, const double* b,
                    std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d wa = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
        acc = _mm256_fmadd_pd(wa, _mm256_loadu_pd(b + i), acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += w[i] * a[i] * b[i];
    return total;
}

double weighted_sumsq(const double* w, const double* a, std::size_t n) {
    return weighted_dot(w, a, a, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double total = hsum(acc);
    for (; i < n; ++i) total += a[i];
    return total;
}

}  // namespace

const KernelTable& table() {
    static const KernelTable t{"avx2", dot, weighted_dot, weighted_sumsq,
                               axpy, sum};
    return t;
}

}  // namespace lolo::kernels::avx2
