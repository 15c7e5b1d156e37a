#include "ellcop/kernels.hpp"

namespace ellcop::kernels {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc0 += a[i] * b[i];
        acc1 += a[i + 1] * b[i + 1];
    }
    if (i < n) acc0 += a[i] * b[i];
    return acc0 + acc1;
}

double sum_sq_scalar(const double* a, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc0 += a[i] * a[i];
        acc1 += a[i + 1] * a[i + 1];
    }
    if (i < n) acc0 += a[i] * a[i];
    return acc0 + acc1;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace ellcop::kernels
