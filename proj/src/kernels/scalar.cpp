#include "lolo/kernels.hpp"

namespace lolo::kernels::scalar {
namespace {

// Four interleaved partial sums, combined as (s0 + s1) + (s2 + s3). Same
// lane structure as the 4-wide vector variants, but without FMA, so results
// differ from them only by rounding.

double dot(const double* a, const double* b, std::size_t n) {
    double s[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s[0] += a[i] * b[i];
        s[1] += a[i + 1] * b[i + 1];
        s[2] += a[i + 2] * b[i + 2];
        s[3] += a[i + 3] * b[i + 3];
    }
    double total = (s[0] + s[1]) + (s[2] + s[3]);
    for (; i < n; ++i) total += a[i] * b[i];
    return total;
}

double weighted_dot(const double* w, const double* a, const double* b,
                    std::size_t n) {
    double s[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s[0] += w[i] * a[i] * b[i];
        s[1] += w[i + 1] * a[i + 1] * b[i + 1];
        s[2] += w[i + 2] * a[i + 2] * b[i + 2];
        s[3] += w[i + 3] * a[i + 3] * b[i + 3];
    }
    double total = (s[0] + s[1]) + (s[2] + s[3]);
    for (; i < n; ++i) total += w[i] * a[i] * b[i];
    return total;
}

double weighted_sumsq(const double* w, const double* a, std::size_t n) {
    return weighted_dot(w, a, a, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* a, std::size_t n) {
    double s[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s[0] += a[i];
        s[1] += a[i + 1];
        s[2] += a[i + 2];
        s[3] += a[i + 3];
    }
    double total = (s[0] + s[1]) + (s[2] + s[3]);
    for (; i < n; ++i) total += a[i];
    return total;
}

}  // namespace

const KernelTable& table() {
    static const KernelTable t{"scalar", dot, weighted_dot, weighted_sumsq,
                               axpy, sum};
    return t;
}

}  // namespace lolo::kernels::scalar
