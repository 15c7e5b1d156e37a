#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "ellcop/copula.hpp"
#include "ellcop/errors.hpp"
#include "ellcop/rng.hpp"
#include "ellcop/testgen.hpp"
#include "oracles.hpp"

using namespace ellcop;

namespace {

SymMatrix corr2(double r) {
    SymMatrix m(2);
    m.set(0, 0, 1.0);
    m.set(1, 1, 1.0);
    m.set(0, 1, r);
    return m;
}

TransformedSample random_transformed(int n, int d, double spread, std::uint64_t seed) {
    Rng rng(seed);
    TransformedSample z;
    z.n = n;
    z.d = d;
    z.z.resize(static_cast<std::size_t>(n) * d);
    for (auto& v : z.z) v = spread * rng.normal();
    return z;
}

// Positive-definite but not unit-diagonal test matrix.
SymMatrix scaled_spd(int d, std::uint64_t seed) {
    const CorrelationMatrix base = random_correlation(d, seed);
    Rng rng(seed + 1);
    std::vector<double> s(d);
    for (auto& v : s) v = 0.2 + 5.0 * rng.uniform01();
    SymMatrix m(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) m.set(i, j, s[i] * s[j] * base(i, j));
    return m;
}

}  // namespace

TEST_CASE("CopulaModel family selection") {
    const CopulaModel g = CopulaModel::gaussian();
    CHECK_FALSE(g.is_t());
    CHECK(g.family() == Family::Gaussian);
    CHECK_THROWS_AS(g.nu(), DomainError);
    const CopulaModel t = CopulaModel::student_t(Dof(4.5));
    CHECK(t.is_t());
    CHECK(t.nu() == 4.5);
}

TEST_CASE("CorrelationMatrix validates unit diagonal and positive definiteness") {
    CHECK_THROWS_AS(CorrelationMatrix(corr2(1.5)), NotPositiveDefinite);
    SymMatrix bad_diag = corr2(0.3);
    bad_diag.set(0, 0, 1.0 + 1e-6);
    CHECK_THROWS_AS(CorrelationMatrix(std::move(bad_diag)), DomainError);

    const CorrelationMatrix ok(corr2(0.3));
    CHECK(ok.dim() == 2);
    CHECK(ok(0, 1) == 0.3);
    CHECK(std::fabs(ok.log_det() - std::log(1.0 - 0.09)) <= 1e-14);
}

TEST_CASE("PseudoSample validation") {
    CHECK_NOTHROW(PseudoSample(2, 2, {0.1, 0.2, 0.3, 0.4}));
    CHECK_THROWS_AS(PseudoSample(0, 2, {}), DegenerateSample);
    CHECK_THROWS_AS(PseudoSample(2, 1, {0.1, 0.2}), DegenerateSample);
    CHECK_THROWS_AS(PseudoSample(2, 2, {0.1, 0.2, 0.3}), DimensionError);
    CHECK_THROWS_AS(PseudoSample(1, 2, {0.0, 0.5}), DomainError);
    CHECK_THROWS_AS(PseudoSample(1, 2, {0.5, 1.0}), DomainError);
}

TEST_CASE("project_to_correlation worked example") {
    SymMatrix m(2);
    m.set(0, 0, 4.0);
    m.set(0, 1, 1.0);
    m.set(1, 1, 1.0);
    const CorrelationMatrix r = project_to_correlation(m);
    CHECK(r(0, 0) == 1.0);
    CHECK(r(1, 1) == 1.0);
    CHECK(r(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("projection is a bit-for-bit no-op on unit-diagonal input") {
    const CorrelationMatrix r = random_correlation(5, 31);
    const CorrelationMatrix p = project_to_correlation(r.matrix());
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(p(i, j) == r(i, j));
}

TEST_CASE("projection rejects non-positive diagonals") {
    SymMatrix m = corr2(0.2);
    m.set(0, 0, -1.0);
    CHECK_THROWS_AS(project_to_correlation(m), NonPositiveDiagonal);
    m.set(0, 0, 0.0);
    CHECK_THROWS_AS(project_to_correlation(m), NonPositiveDiagonal);
}

TEST_CASE("projection of a scaled matrix has exact unit diagonal") {
    const SymMatrix m = scaled_spd(6, 77);
    const CorrelationMatrix r = project_to_correlation(m);
    for (int i = 0; i < 6; ++i) CHECK(r(i, i) == 1.0);
    // Off-diagonal entries match the entrywise definition.
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            CHECK(std::fabs(r(i, j) - m(i, j) / std::sqrt(m(i, i) * m(j, j))) <= 1e-15);
}

TEST_CASE("transform applies the margin quantile elementwise") {
    const PseudoSample u(2, 2, {0.5, 0.975, 0.75, 0.25});
    const TransformedSample g = transform(u, CopulaModel::gaussian());
    CHECK(std::fabs(g.at(0, 0)) <= 1e-15);
    CHECK(std::fabs(g.at(0, 1) - 1.959963985) <= 1e-9);
    const TransformedSample s = transform(u, CopulaModel::student_t(Dof(1.0)));
    CHECK(std::fabs(s.at(1, 0) - 1.0) <= 1e-12);
    CHECK(std::fabs(s.at(1, 1) + 1.0) <= 1e-12);
}

TEST_CASE("gaussian_log_density worked examples") {
    const std::vector<double> zero = {0.0, 0.0};
    CHECK(gaussian_log_density(zero, CorrelationMatrix::identity(2)) == 0.0);
    const CorrelationMatrix r(corr2(0.5));
    CHECK(std::fabs(gaussian_log_density(zero, r) - (-0.5 * std::log(0.75))) <= 1e-14);
    CHECK(gaussian_log_density(zero, r) > 0.0);  // dependence raises the density at the center
}

TEST_CASE("t_log_density worked example") {
    const std::vector<double> zero = {0.0, 0.0};
    const double got = t_log_density(zero, CorrelationMatrix::identity(2), Dof(1.0));
    CHECK(std::fabs(got - std::log(oracle::kPi / 2.0)) <= 1e-13);
}

TEST_CASE("densities match the definition-based oracle") {
    const CorrelationMatrix rho = random_correlation(4, 123);
    Rng rng(9);
    for (int rep = 0; rep < 25; ++rep) {
        std::vector<double> row(4);
        for (auto& v : row) v = 2.5 * rng.normal();
        auto [rinv, logdet] = oracle::gj_inverse(oracle::from_sym(rho.matrix()));
        const double g_want =
            oracle::log_density_row(row.data(), 4, rinv, logdet, CopulaModel::gaussian());
        CHECK(oracle::rel_err(gaussian_log_density(row, rho), g_want) <= 1e-12);
        for (double v : {0.5, 3.0, 50.0}) {
            const double t_want = oracle::log_density_row(row.data(), 4, rinv, logdet,
                                                          CopulaModel::student_t(Dof(v)));
            CHECK(oracle::rel_err(t_log_density(row, rho, Dof(v)), t_want) <= 1e-12);
        }
    }
}

TEST_CASE("t density approaches the gaussian one as nu grows huge") {
    const CorrelationMatrix rho = random_correlation(3, 5);
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> row(3);
        for (auto& v : row) v = rng.normal();
        const double g = gaussian_log_density(row, rho);
        const double t = t_log_density(row, rho, Dof(1e8));
        CHECK(std::fabs(g - t) <= 1e-4);
    }
}

TEST_CASE("log_likelihood sums per-row densities") {
    const CorrelationMatrix rho = random_correlation(3, 17);
    const TransformedSample z1 = random_transformed(1, 3, 1.0, 21);
    const CopulaModel model = CopulaModel::student_t(Dof(5.0));
    const std::vector<double> row(z1.row(0), z1.row(0) + 3);
    CHECK(log_likelihood(z1, rho, model) == t_log_density(row, rho, Dof(5.0)));

    // Additivity over concatenated samples.
    const TransformedSample za = random_transformed(40, 3, 1.0, 22);
    const TransformedSample zb = random_transformed(60, 3, 1.0, 23);
    TransformedSample zc;
    zc.n = 100;
    zc.d = 3;
    zc.z = za.z;
    zc.z.insert(zc.z.end(), zb.z.begin(), zb.z.end());
    const double sum = log_likelihood(za, rho, model) + log_likelihood(zb, rho, model);
    CHECK(std::fabs(log_likelihood(zc, rho, model) - sum) <= 1e-10 * std::max(1.0, std::fabs(sum)));
}

TEST_CASE("log_likelihood matches the naive per-row summation oracle") {
    const CorrelationMatrix rho = random_correlation(10, 404);
    const TransformedSample z = random_transformed(100, 10, 1.2, 405);
    for (const CopulaModel& model :
         {CopulaModel::gaussian(), CopulaModel::student_t(Dof(4.0))}) {
        const double got = log_likelihood(z, rho, model);
        const double want = oracle::loglik(z, rho.matrix(), model);
        CHECK(std::fabs(got - want) <= 1e-10 * std::max(1.0, std::fabs(want)));
    }
}

TEST_CASE("d_matrix closed forms") {
    // One observation at the origin: the moment term vanishes.
    TransformedSample z;
    z.n = 1;
    z.d = 2;
    z.z = {0.0, 0.0};
    const SymMatrix dm = d_matrix(z, CorrelationMatrix::identity(2), CopulaModel::gaussian());
    CHECK(dm(0, 0) == 0.5);
    CHECK(dm(1, 1) == 0.5);
    CHECK(dm(0, 1) == 0.0);

    // Sample whose moment matrix equals rho exactly: the derivative is zero.
    TransformedSample fixed;
    fixed.n = 2;
    fixed.d = 2;
    fixed.z = {1.0, 1.0, 1.0, -1.0};
    const SymMatrix zero =
        d_matrix(fixed, CorrelationMatrix::identity(2), CopulaModel::gaussian());
    CHECK(zero.max_abs() == 0.0);
}

TEST_CASE("d_matrix matches central differences in precision coordinates") {
    for (int d : {2, 3, 5}) {
        const CorrelationMatrix rho = random_correlation(d, 600 + d);
        const TransformedSample z = random_transformed(50, d, 1.0, 700 + d);
        const auto g = oracle::fd_check_d_matrix(z, rho, CopulaModel::gaussian());
        CHECK(g.max_rel < 1e-5);
        const auto t = oracle::fd_check_d_matrix(z, rho, CopulaModel::student_t(Dof(4.0)));
        CHECK(t.max_rel < 1e-5);
        const auto t_small = oracle::fd_check_d_matrix(z, rho, CopulaModel::student_t(Dof(0.5)));
        CHECK(t_small.max_rel < 1e-5);
    }
}

TEST_CASE("inverse_gradient_direction vanishes when the moment matrix equals rho") {
    TransformedSample fixed;
    fixed.n = 2;
    fixed.d = 2;
    fixed.z = {1.0, 1.0, 1.0, -1.0};
    const SymMatrix v =
        inverse_gradient_direction(SymMatrix::identity(2), fixed, CopulaModel::gaussian());
    CHECK(v.max_abs() == 0.0);
}

TEST_CASE("inverse_gradient_direction scale equivariance") {
    const SymMatrix sigma = scaled_spd(4, 88);
    const TransformedSample z = random_transformed(60, 4, 1.0, 89);
    const CopulaModel model = CopulaModel::student_t(Dof(6.0));
    const SymMatrix v1 = inverse_gradient_direction(sigma, z, model);
    const double lambda = 0.02;
    const CorrelationMatrix next1 = project_to_correlation(add_scaled(sigma, lambda, v1));
    for (double c : {0.1, 7.0, 100.0}) {
        SymMatrix cs(4);
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) cs.set(i, j, c * sigma(i, j));
        const SymMatrix vc = inverse_gradient_direction(cs, z, model);
        // V(c Sigma) = c V(Sigma) ...
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                CHECK(std::fabs(vc(i, j) - c * v1(i, j)) <=
                      1e-12 * std::max(1.0, std::fabs(c * v1(i, j))));
        // ... so the projected iterate is scale-free once lambda carries the
        // same factor: Pi(c Sigma + (c lambda) V(Sigma)) = Pi(Sigma + lambda V).
        const CorrelationMatrix nextc =
            project_to_correlation(add_scaled(cs, lambda, vc));
        CHECK(max_abs_diff(nextc.matrix(), next1.matrix()) <= 1e-12);
    }
}

TEST_CASE("the direction is an ascent direction of the projected likelihood") {
    const SymMatrix sigma = scaled_spd(5, 91);
    const TransformedSample z = random_transformed(80, 5, 1.0, 92);
    for (const CopulaModel& model :
         {CopulaModel::gaussian(), CopulaModel::student_t(Dof(3.0))}) {
        const SymMatrix v = inverse_gradient_direction(sigma, z, model);
        const double h = 1e-6 / std::max(1.0, v.max_abs());
        const double up = projected_log_likelihood(add_scaled(sigma, h, v), z, model);
        const double down = projected_log_likelihood(add_scaled(sigma, -h, v), z, model);
        CHECK(up - down >= -1e-9 * std::max(1.0, std::fabs(up)));
    }
}

TEST_CASE("sigma_gradient matches central differences of the projected likelihood") {
    for (int d : {2, 4}) {
        const SymMatrix sigma = scaled_spd(d, 300 + d);
        const TransformedSample z = random_transformed(40, d, 1.0, 310 + d);
        const auto g = oracle::fd_check_sigma_gradient(z, sigma, CopulaModel::gaussian());
        CHECK(g.max_rel < 1e-5);
        const auto t = oracle::fd_check_sigma_gradient(z, sigma, CopulaModel::student_t(Dof(5.0)));
        CHECK(t.max_rel < 1e-5);
    }
}

TEST_CASE("congruence ties sigma_gradient to the direction") {
    const SymMatrix sigma = scaled_spd(4, 111);
    const TransformedSample z = random_transformed(50, 4, 1.0, 112);
    const CopulaModel model = CopulaModel::student_t(Dof(7.0));
    const SymMatrix g = sigma_gradient(sigma, z, model);
    const SymMatrix v = inverse_gradient_direction(sigma, z, model);
    // dL*/dSigma = Sigma^{-1} V Sigma^{-1}, so Sigma G Sigma = V. The
    // intermediate G*Sigma is not symmetric, so the outer multiply is done
    // by hand in general layout.
    std::vector<double> gs(16), sgs(16);
    sym_product(g, sigma, gs.data());
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += sigma(i, k) * gs[4 * k + j];
            sgs[4 * i + j] = acc;
        }
    const double scale = std::max(1.0, v.max_abs());
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(std::fabs(sgs[4 * i + j] - v(i, j)) <= 1e-10 * scale);
}

TEST_CASE("gradient curvature form is nonnegative and matches its eigen expansion") {
    const SymMatrix sigma = scaled_spd(5, 212);
    const TransformedSample z = random_transformed(60, 5, 1.0, 213);
    const CopulaModel model = CopulaModel::gaussian();
    const SymMatrix g = sigma_gradient(sigma, z, model);

    // tr(G Sigma G Sigma) via plain products.
    std::vector<double> gs(25);
    sym_product(g, sigma, gs.data());
    double tr = 0.0;
    for (int i = 0; i < 5; ++i) {
        double row = 0.0;
        for (int k = 0; k < 5; ++k) row += gs[5 * i + k] * gs[5 * k + i];
        tr += row;
    }
    CHECK(tr >= -1e-12);

    // Equals sum_ij lam_i lam_j M_ij^2 with M = O' G O from Sigma = O L O'.
    const EigenDecomposition e = sym_eigen(sigma);
    double want = 0.0;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            double m = 0.0;
            for (int a = 0; a < 5; ++a)
                for (int b = 0; b < 5; ++b) m += e.vec(a, i) * g(a, b) * e.vec(b, j);
            want += e.values[i] * e.values[j] * m * m;
        }
    }
    CHECK(std::fabs(tr - want) <= 1e-9 * std::max(1.0, std::fabs(tr)));
}

TEST_CASE("projected_log_likelihood strips scale") {
    const SymMatrix sigma = scaled_spd(4, 515);
    const TransformedSample z = random_transformed(70, 4, 1.0, 516);
    const CopulaModel model = CopulaModel::student_t(Dof(4.0));
    const double base = projected_log_likelihood(sigma, z, model);
    for (double c : {0.1, 7.0, 100.0}) {
        SymMatrix cs(4);
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) cs.set(i, j, c * sigma(i, j));
        CHECK(std::fabs(projected_log_likelihood(cs, z, model) - base) <= 1e-9);
    }
    // And it is the likelihood of the projected matrix.
    const double via_oracle = oracle::loglik(z, project_to_correlation(sigma).matrix(), model);
    CHECK(std::fabs(base - via_oracle) <= 1e-10 * std::max(1.0, std::fabs(base)));
}

TEST_CASE("sample_copula shape, range and determinism") {
    const CorrelationMatrix rho = random_correlation(3, 808);
    const CopulaModel model = CopulaModel::student_t(Dof(3.0));
    const PseudoSample a = sample_copula(rho, model, 200, 42);
    CHECK(a.n == 200);
    CHECK(a.d == 3);
    for (double v : a.u) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    const PseudoSample b = sample_copula(rho, model, 200, 42);
    CHECK(a.u == b.u);
    const PseudoSample c = sample_copula(rho, model, 200, 43);
    CHECK(a.u != c.u);
}

TEST_CASE("independence sampling yields near-zero correlations") {
    const int n = 4000;
    const PseudoSample u =
        sample_copula(CorrelationMatrix::identity(3), CopulaModel::gaussian(), n, 7);
    const TransformedSample g = transform(u, CopulaModel::gaussian());
    const double bound = 4.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            std::vector<double> xi(n), xj(n);
            for (int t = 0; t < n; ++t) {
                xi[t] = g.at(t, i);
                xj[t] = g.at(t, j);
            }
            CHECK(std::fabs(oracle::pearson(xi, xj)) <= bound);
        }
    }
}

TEST_CASE("sampler dependence matches the rank-correlation identity") {
    // Kendall tau of an elliptical copula is (2/pi) asin(rho_12), for any nu.
    const int n = 100000;
    for (double r : {0.8, -0.8}) {
        const CorrelationMatrix rho(corr2(r));
        const double want = (2.0 / oracle::kPi) * std::asin(r);
        for (const CopulaModel& model :
             {CopulaModel::gaussian(), CopulaModel::student_t(Dof(4.0))}) {
            const PseudoSample u = sample_copula(rho, model, n, 1234);
            std::vector<double> x(n), y(n);
            for (int t = 0; t < n; ++t) {
                x[t] = u.at(t, 0);
                y[t] = u.at(t, 1);
            }
            CHECK(std::fabs(oracle::kendall_tau(x, y) - want) <= 0.01);
        }
    }
}

TEST_CASE("the generating matrix beats the identity on dependent data") {
    const CorrelationMatrix rho(corr2(0.5));
    const CopulaModel model = CopulaModel::gaussian();
    const PseudoSample u = sample_copula(rho, model, 2000, 99);
    const TransformedSample z = transform(u, model);
    CHECK(log_likelihood(z, rho, model) >
          log_likelihood(z, CorrelationMatrix::identity(2), model));
}
