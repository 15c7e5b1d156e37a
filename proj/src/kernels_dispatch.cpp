#include "ellcop/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace ellcop::kernels {

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
double dot_avx2(const double*, const double*, std::size_t);
double sum_sq_avx2(const double*, std::size_t);
void axpy_avx2(double, const double*, double*, std::size_t);
#endif
#if defined(__aarch64__) && defined(__ARM_NEON)
double dot_neon(const double*, const double*, std::size_t);
double sum_sq_neon(const double*, std::size_t);
void axpy_neon(double, const double*, double*, std::size_t);
#endif

namespace {

struct Table {
    Backend backend;
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum_sq)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
};

constexpr Table kScalarTable{Backend::Scalar, dot_scalar, sum_sq_scalar, axpy_scalar};

bool cpu_supports(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return true;
        case Backend::Avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Backend::Neon:
#if defined(__aarch64__) && defined(__ARM_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Table make_table(Backend b) {
    switch (b) {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
        case Backend::Avx2:
            return Table{Backend::Avx2, dot_avx2, sum_sq_avx2, axpy_avx2};
#endif
#if defined(__aarch64__) && defined(__ARM_NEON)
        case Backend::Neon:
            return Table{Backend::Neon, dot_neon, sum_sq_neon, axpy_neon};
#endif
        default:
            return kScalarTable;
    }
}

Table detect() {
    if (const char* env = std::getenv("ELLCOP_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return kScalarTable;
        if (std::strcmp(env, "avx2") == 0 && cpu_supports(Backend::Avx2))
            return make_table(Backend::Avx2);
        if (std::strcmp(env, "neon") == 0 && cpu_supports(Backend::Neon))
            return make_table(Backend::Neon);
        // unknown or unsupported request falls through to auto-detection
    }
    if (cpu_supports(Backend::Avx2)) return make_table(Backend::Avx2);
    if (cpu_supports(Backend::Neon)) return make_table(Backend::Neon);
    return kScalarTable;
}

Table& table() {
    static Table t = detect();
    return t;
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }
double sum_sq(const double* a, std::size_t n) { return table().sum_sq(a, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { table().axpy(alpha, x, y, n); }

Backend active_backend() { return table().backend; }

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "unknown";
}

bool backend_available(Backend b) { return cpu_supports(b); }

// Not thread-safe; intended for test setup before any worker threads exist.
bool force_backend(Backend b) {
    if (!cpu_supports(b)) return false;
    table() = make_table(b);
    return true;
}

}  // namespace ellcop::kernels
