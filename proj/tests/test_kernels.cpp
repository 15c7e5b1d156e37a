#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "ellcop/copula.hpp"
#include "ellcop/estimate.hpp"
#include "ellcop/kernels.hpp"
#include "ellcop/rng.hpp"
#include "ellcop/testgen.hpp"

namespace k = ellcop::kernels;

namespace {

// Restores whatever backend was active when the guard was created.
struct BackendGuard {
    k::Backend saved = k::active_backend();
    ~BackendGuard() { k::force_backend(saved); }
};

std::vector<double> random_vec(std::size_t n, ellcop::Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = 2.0 * rng.uniform01() - 1.0;
    return v;
}

std::vector<std::size_t> test_lengths() {
    std::vector<std::size_t> lens;
    for (std::size_t n = 0; n <= 130; ++n) lens.push_back(n);
    for (std::size_t n : {255, 256, 511, 512, 1000, 1023}) lens.push_back(n);
    return lens;
}

void check_backend_matches_scalar(k::Backend b) {
    BackendGuard guard;
    ellcop::Rng rng(20240601);
    for (std::size_t n : test_lengths()) {
        auto a = random_vec(n, rng);
        auto x = random_vec(n, rng);
        auto y = random_vec(n, rng);
        const double alpha = 2.0 * rng.uniform01() - 1.0;

        const double dot_ref = k::dot_scalar(a.data(), x.data(), n);
        const double ss_ref = k::sum_sq_scalar(a.data(), n);
        auto y_ref = y;
        k::axpy_scalar(alpha, x.data(), y_ref.data(), n);

        REQUIRE(k::force_backend(b));
        const double dot_got = k::dot(a.data(), x.data(), n);
        const double ss_got = k::sum_sq(a.data(), n);
        auto y_got = y;
        k::axpy(alpha, x.data(), y_got.data(), n);

        // Reassociation and FMA change rounding, not magnitude: bound the
        // difference by a small multiple of the absolute-value sums.
        double dot_scale = 1.0, ss_scale = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            dot_scale += std::fabs(a[i] * x[i]);
            ss_scale += a[i] * a[i];
        }
        CHECK(std::fabs(dot_got - dot_ref) <= 1e-13 * dot_scale);
        CHECK(std::fabs(ss_got - ss_ref) <= 1e-13 * ss_scale);
        for (std::size_t i = 0; i < n; ++i) {
            const double scale = 1.0 + std::fabs(y[i]) + std::fabs(alpha * x[i]);
            CHECK(std::fabs(y_got[i] - y_ref[i]) <= 1e-14 * scale);
        }
    }
}

}  // namespace

TEST_CASE("scalar backend is always available and forcible") {
    BackendGuard guard;
    CHECK(k::backend_available(k::Backend::Scalar));
    CHECK(k::force_backend(k::Backend::Scalar));
    CHECK(k::active_backend() == k::Backend::Scalar);
    CHECK(k::backend_name(k::active_backend()) == "scalar");
}

TEST_CASE("backend names") {
    CHECK(k::backend_name(k::Backend::Scalar) == "scalar");
    CHECK(k::backend_name(k::Backend::Avx2) == "avx2");
    CHECK(k::backend_name(k::Backend::Neon) == "neon");
}

TEST_CASE("forcing an unavailable backend fails and leaves the active one unchanged") {
    BackendGuard guard;
    REQUIRE(k::force_backend(k::Backend::Scalar));
    for (k::Backend b : {k::Backend::Avx2, k::Backend::Neon}) {
        if (k::backend_available(b)) continue;
        CHECK_FALSE(k::force_backend(b));
        CHECK(k::active_backend() == k::Backend::Scalar);
    }
}

TEST_CASE("dispatched kernels match the scalar reference on all vector lengths") {
    bool any_simd = false;
    for (k::Backend b : {k::Backend::Avx2, k::Backend::Neon}) {
        if (!k::backend_available(b)) continue;
        any_simd = true;
        check_backend_matches_scalar(b);
    }
    if (!any_simd) {
        // Still exercise the dispatch table against the reference symbols.
        check_backend_matches_scalar(k::Backend::Scalar);
    }
}

TEST_CASE("empty and single-element inputs") {
    const double a[1] = {3.0};
    const double b[1] = {-2.0};
    CHECK(k::dot(a, b, 0) == 0.0);
    CHECK(k::sum_sq(a, 0) == 0.0);
    CHECK(k::dot(a, b, 1) == -6.0);
    CHECK(k::sum_sq(a, 1) == 9.0);
    double y[1] = {1.0};
    k::axpy(0.5, a, y, 1);
    CHECK(y[0] == 2.5);
}

TEST_CASE("full fits agree across backends") {
    bool any_simd = false;
    for (k::Backend b : {k::Backend::Avx2, k::Backend::Neon})
        if (k::backend_available(b)) any_simd = true;
    if (!any_simd) return;  // single-backend machine: nothing to compare

    using namespace ellcop;
    auto [rho, sample] = generate_case({.dim = 5, .nu = 6.0, .n_obs = 150, .seed = 77});
    (void)rho;
    const CopulaModel model = CopulaModel::student_t(Dof(6.0));
    const TransformedSample z = transform(sample, model);

    BackendGuard guard;
    REQUIRE(k::force_backend(k::Backend::Scalar));
    const FitResult ref = fit_inverse_gradient(z, model, StepConfig::defaults_for(z.n));
    for (k::Backend b : {k::Backend::Avx2, k::Backend::Neon}) {
        if (!k::backend_available(b)) continue;
        REQUIRE(k::force_backend(b));
        const FitResult got = fit_inverse_gradient(z, model, StepConfig::defaults_for(z.n));
        CHECK(got.status == ref.status);
        CHECK(std::fabs(got.loglik - ref.loglik) <= 1e-6 * std::max(1.0, std::fabs(ref.loglik)));
        CHECK(max_abs_diff(got.rho_hat.matrix(), ref.rho_hat.matrix()) <= 1e-6);
    }
}
