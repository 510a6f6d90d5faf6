#pragma once
// Data-parallel reductions used by the coordinate-descent and IRLS inner
// loops. A scalar reference implementation is always compiled; AVX2+FMA
// (x86-64) and NEON (aarch64) variants are compiled into separate
// translation units and picked at runtime.
//
// Every variant uses a fixed accumulation order, so a given variant is
// bit-reproducible run to run. Different variants agree to rounding only.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace lolo::kernels {

using DotFn = double (*)(const double* a, const double* b, std::size_t n);
using WeightedDotFn = double (*)(const double* w, const double* a,
                                 const double* b, std::size_t n);
using WeightedSumSqFn = double (*)(const double* w, const double* a,
                                   std::size_t n);
using AxpyFn = void (*)(double alpha, const double* x, double* y,
                        std::size_t n);
using SumFn = double (*)(const double* a, std::size_t n);

struct KernelTable {
    std::string_view name;
    DotFn dot;                    // sum a_i b_i
    WeightedDotFn weighted_dot;   // sum w_i a_i b_i
    WeightedSumSqFn weighted_sumsq;  // sum w_i a_i^2
    AxpyFn axpy;                  // y += alpha x
    SumFn sum;                    // sum a_i
};

namespace scalar {
const KernelTable& table();
}
#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
const KernelTable& table();
}
#endif
#if defined(__aarch64__)
namespace neon {
const KernelTable& table();
}
#endif

/// Tables usable on this CPU, scalar first.
std::vector<const KernelTable*> available();

/// The table used by the library. Chosen on first use: the widest supported
/// variant, unless LOLO_DCV_KERNEL names another (e.g. "scalar").
const KernelTable& active();

/// Force a variant by name. Returns false if it is unavailable here.
/// Not thread-safe with concurrent kernel use; meant for tests and startup.
bool select(std::string_view name);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline double weighted_dot(std::span<const double> w, std::span<const double> a,
                           std::span<const double> b) {
    return active().weighted_dot(w.data(), a.data(), b.data(), a.size());
}
inline double weighted_sumsq(std::span<const double> w,
                             std::span<const double> a) {
    return active().weighted_sumsq(w.data(), a.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}
inline double sum(std::span<const double> a) {
    return active().sum(a.data(), a.size());
}

}  // namespace lolo::kernels
