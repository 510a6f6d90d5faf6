#include <arm_neon.h>

#include "lolo/kernels.hpp"

namespace lolo::kernels::neon {
namespace {

// Two float64x2 accumulators give four lanes: acc0 = (l0, l1), acc1 = (l2, l3).
inline double combine(float64x2_t acc0, float64x2_t acc1) {
    return (vgetq_lane_f64(acc0, 0) + vgetq_lane_f64(acc0, 1)) +
           (vgetq_lane_f64(acc1, 0) + vgetq_lane_f64(acc1, 1));
}

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double total = combine(acc0, acc1);
    for (; i < n; ++i) total += a[i] * b[i];
    return total;
}

double weighted_dot(const double* w, const double* a, const double* b,
                    std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float64x2_t wa0 = vmulq_f64(vld1q_f64(w + i), vld1q_f64(a + i));
        float64x2_t wa1 = vmulq_f64(vld1q_f64(w + i + 2), vld1q_f64(a + i + 2));
        acc0 = vfmaq_f64(acc0, wa0, vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, wa1, vld1q_f64(b + i + 2));
    }
    double total = combine(acc0, acc1);
    for (; i < n; ++i) total += w[i] * a[i] * b[i];
    return total;
}

double weighted_sumsq(const double* w, const double* a, std::size_t n) {
    return weighted_dot(w, a, a, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* a, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
        acc1 = vaddq_f64(acc1, vld1q_f64(a + i + 2));
    }
    double total = combine(acc0, acc1);
    for (; i < n; ++i) total += a[i];
    return total;
}

}  // namespace

const KernelTable& table() {
    static const KernelTable t{"neon", dot, weighted_dot, weighted_sumsq,
                               axpy, sum};
    return t;
}

}  // namespace lolo::kernels::neon
