#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel primitives under the likelihood and moment-matrix loops.
// Scalar reference implementations always exist; AVX2 (x86-64) and NEON
// (aarch64) variants are selected once at runtime when the CPU supports
// them. The env var ELLCOP_KERNELS=scalar|avx2|neon forces a backend, and
// tests use force_backend() to run the equivalence suite.

namespace ellcop::kernels {

enum class Backend { Scalar, Avx2, Neon };

// Sum of a[i]*b[i].
double dot(const double* a, const double* b, std::size_t n);

// Sum of a[i]^2.
double sum_sq(const double* a, std::size_t n);

// y[i] += alpha * x[i].
void axpy(double alpha, const double* x, double* y, std::size_t n);

Backend active_backend();
std::string_view backend_name(Backend b);

// Returns false if the requested backend is not available on this CPU.
// Passing Backend::Scalar always succeeds and is how tests restore state.
bool force_backend(Backend b);

bool backend_available(Backend b);

// Scalar reference versions, callable directly regardless of dispatch state.
double dot_scalar(const double* a, const double* b, std::size_t n);
double sum_sq_scalar(const double* a, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);

}  // namespace ellcop::kernels
