// NEON variants for aarch64. float64x2 lanes, two accumulators.

#include "ellcop/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

namespace ellcop::kernels {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    if (i + 2 <= n) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        i += 2;
    }
    double out = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) out += a[i] * b[i];
    return out;
}

double sum_sq_neon(const double* a, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float64x2_t v0 = vld1q_f64(a + i);
        float64x2_t v1 = vld1q_f64(a + i + 2);
        acc0 = vfmaq_f64(acc0, v0, v0);
        acc1 = vfmaq_f64(acc1, v1, v1);
    }
    if (i + 2 <= n) {
        float64x2_t v = vld1q_f64(a + i);
        acc0 = vfmaq_f64(acc0, v, v);
        i += 2;
    }
    double out = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) out += a[i] * a[i];
    return out;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t yy = vld1q_f64(y + i);
        yy = vfmaq_f64(yy, va, vld1q_f64(x + i));
        vst1q_f64(y + i, yy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace ellcop::kernels

#endif  // aarch64
