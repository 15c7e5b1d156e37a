#include "ellcop/copula.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ellcop/kernels.hpp"
#include "ellcop/rng.hpp"

namespace ellcop {

namespace {

void check_dims(int sample_d, int rho_d) {
    if (sample_d != rho_d)
        throw DimensionError("sample dimension " + std::to_string(sample_d) +
                             " does not match matrix dimension " + std::to_string(rho_d));
}

void check_row(const std::vector<double>& row, int d) {
    if (static_cast<int>(row.size()) != d)
        throw DimensionError("row length " + std::to_string(row.size()) +
                             " does not match matrix dimension " + std::to_string(d));
    for (double v : row)
        if (!std::isfinite(v)) throw DomainError("non-finite entry in observation row");
}

// Constant term of the t copula log density.
double t_constant(double nu, int d) {
    return log_gamma(0.5 * (nu + d)) + (d - 1) * log_gamma(0.5 * nu) -
           d * log_gamma(0.5 * (nu + 1.0));
}

}  // namespace

CorrelationMatrix::CorrelationMatrix(SymMatrix m) : m_(std::move(m)) {
    const int d = m_.dim();
    for (int i = 0; i < d; ++i)
        if (m_(i, i) != 1.0)
            throw DomainError("correlation matrix diagonal entry " + std::to_string(i) +
                              " is not exactly 1");
    chol_ = cholesky(m_);  // PD with unit diagonal forces |off-diagonal| < 1
}

PseudoSample::PseudoSample(int n_, int d_, std::vector<double> data)
    : n(n_), d(d_), u(std::move(data)) {
    if (n < 1 || d < 2)
        throw DegenerateSample("pseudo-sample needs n >= 1 observations and d >= 2 columns (got n=" +
                               std::to_string(n) + ", d=" + std::to_string(d) + ")");
    if (u.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(d))
        throw DimensionError("pseudo-sample storage does not match n*d");
    for (double v : u)
        if (!(v > 0.0) || !(v < 1.0))
            throw DomainError("pseudo-sample entries must lie strictly inside (0,1)");
}

namespace detail {

SymMatrix scale_to_unit_diagonal(const SymMatrix& sigma) {
    const int d = sigma.dim();
    std::vector<double> inv_sqrt(d);
    for (int i = 0; i < d; ++i) {
        const double s = sigma(i, i);
        if (!(s > 0.0)) throw NonPositiveDiagonal(i);
        inv_sqrt[i] = 1.0 / std::sqrt(s);
    }
    SymMatrix r(d);
    for (int i = 0; i < d; ++i) {
        r.set(i, i, 1.0);
        for (int j = i + 1; j < d; ++j) r.set(i, j, sigma(i, j) * inv_sqrt[i] * inv_sqrt[j]);
    }
    return r;
}

}  // namespace detail

CorrelationMatrix project_to_correlation(const SymMatrix& sigma) {
    return CorrelationMatrix(detail::scale_to_unit_diagonal(sigma));
}

TransformedSample transform(const PseudoSample& sample, const CopulaModel& model) {
    TransformedSample out;
    out.n = sample.n;
    out.d = sample.d;
    out.z.resize(sample.u.size());
    if (model.is_t()) {
        const Dof nu(model.nu());
        for (std::size_t i = 0; i < sample.u.size(); ++i) out.z[i] = t_quantile(sample.u[i], nu);
    } else {
        for (std::size_t i = 0; i < sample.u.size(); ++i) out.z[i] = norm_quantile(sample.u[i]);
    }
    return out;
}

double gaussian_log_density(const std::vector<double>& g_row, const CorrelationMatrix& rho) {
    check_row(g_row, rho.dim());
    const double q = rho.factor().quad_form_inv(g_row.data());
    const double gg = kernels::sum_sq(g_row.data(), g_row.size());
    return -0.5 * rho.log_det() - 0.5 * q + 0.5 * gg;
}

double t_log_density(const std::vector<double>& s_row, const CorrelationMatrix& rho, Dof nu) {
    const int d = rho.dim();
    check_row(s_row, d);
    const double v = nu.nu;
    const double q = rho.factor().quad_form_inv(s_row.data());
    double margin_sum = 0.0;
    for (double s : s_row) margin_sum += std::log1p(s * s / v);
    return t_constant(v, d) - 0.5 * rho.log_det() - 0.5 * (v + d) * std::log1p(q / v) +
           0.5 * (v + 1.0) * margin_sum;
}

namespace detail {

double log_likelihood_given_factor(const TransformedSample& sample, const CholeskyFactor& f,
                                   const CopulaModel& model) {
    const int d = f.dim;
    check_dims(sample.d, d);
    if (sample.n < 1) throw DegenerateSample("log-likelihood needs at least one observation");

    const double logdet = f.log_det();
    std::vector<double> w(d);

    if (!model.is_t()) {
        double sum_q = 0.0;
        double sum_gg = 0.0;
        for (int t = 0; t < sample.n; ++t) {
            const double* row = sample.row(t);
            std::memcpy(w.data(), row, sizeof(double) * d);
            f.solve_lower(w.data());
            sum_q += kernels::sum_sq(w.data(), static_cast<std::size_t>(d));
            sum_gg += kernels::sum_sq(row, static_cast<std::size_t>(d));
        }
        return -0.5 * sample.n * logdet - 0.5 * sum_q + 0.5 * sum_gg;
    }

    const double v = model.nu();
    double sum_core = 0.0;
    double sum_margin = 0.0;
    for (int t = 0; t < sample.n; ++t) {
        const double* row = sample.row(t);
        std::memcpy(w.data(), row, sizeof(double) * d);
        f.solve_lower(w.data());
        const double q = kernels::sum_sq(w.data(), static_cast<std::size_t>(d));
        sum_core += std::log1p(q / v);
        for (int i = 0; i < d; ++i) sum_margin += std::log1p(row[i] * row[i] / v);
    }
    return sample.n * t_constant(v, d) - 0.5 * sample.n * logdet - 0.5 * (v + d) * sum_core +
           0.5 * (v + 1.0) * sum_margin;
}

SymMatrix d_matrix_given_factor(const TransformedSample& sample, const SymMatrix& rho,
                                const CholeskyFactor& f, const CopulaModel& model) {
    const int d = rho.dim();
    check_dims(sample.d, d);
    std::vector<double> acc(static_cast<std::size_t>(d) * d, 0.0);
    const double half_n = 0.5 * sample.n;
    SymMatrix out(d);

    if (!model.is_t()) {
        for (int t = 0; t < sample.n; ++t) {
            const double* row = sample.row(t);
            for (int i = 0; i < d; ++i)
                kernels::axpy(row[i], row, acc.data() + static_cast<std::size_t>(i) * d,
                              static_cast<std::size_t>(d));
        }
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j)
                out.set(i, j, half_n * rho(i, j) - 0.5 * acc[static_cast<std::size_t>(i) * d + j]);
        return out;
    }

    const double v = model.nu();
    std::vector<double> w(d);
    for (int t = 0; t < sample.n; ++t) {
        const double* row = sample.row(t);
        std::memcpy(w.data(), row, sizeof(double) * d);
        f.solve_lower(w.data());
        const double q = kernels::sum_sq(w.data(), static_cast<std::size_t>(d));
        const double wt = 1.0 / (1.0 + q / v);
        for (int i = 0; i < d; ++i)
            kernels::axpy(wt * row[i], row, acc.data() + static_cast<std::size_t>(i) * d,
                          static_cast<std::size_t>(d));
    }
    const double scale = (v + d) / (2.0 * v);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
            out.set(i, j, half_n * rho(i, j) - scale * acc[static_cast<std::size_t>(i) * d + j]);
    return out;
}

SymMatrix direction_given_factor(const std::vector<double>& sigma_diag, const SymMatrix& rho,
                                 const CholeskyFactor& f, const TransformedSample& sample,
                                 const CopulaModel& model) {
    const int d = rho.dim();
    if (static_cast<int>(sigma_diag.size()) != d)
        throw DimensionError("sigma diagonal length does not match matrix dimension");

    const SymMatrix D = d_matrix_given_factor(sample, rho, f, model);
    const SymMatrix rinv = f.inverse();

    // w_k = (D rho^{-1})_kk; both matrices are symmetric so rows stand in for columns.
    std::vector<double> w(d);
    for (int k = 0; k < d; ++k)
        w[k] = kernels::dot(D.row(k), rinv.row(k), static_cast<std::size_t>(d));

    std::vector<double> root(d);
    for (int i = 0; i < d; ++i) {
        if (!(sigma_diag[i] > 0.0)) throw NonPositiveDiagonal(i);
        root[i] = std::sqrt(sigma_diag[i]);  // entries of A^{-1}
    }

    // V_ij = -(D - rho diag(w) rho)_ij * root_i root_j
    SymMatrix out(d);
    std::vector<double> scaled(d);
    for (int i = 0; i < d; ++i) {
        for (int k = 0; k < d; ++k) scaled[k] = rho(i, k) * w[k];
        for (int j = i; j < d; ++j) {
            const double t = kernels::dot(scaled.data(), rho.row(j), static_cast<std::size_t>(d));
            out.set(i, j, -(D(i, j) - t) * root[i] * root[j]);
        }
    }
    return out;
}

}  // namespace detail

double log_likelihood(const TransformedSample& sample, const CorrelationMatrix& rho,
                      const CopulaModel& model) {
    check_dims(sample.d, rho.dim());
    return detail::log_likelihood_given_factor(sample, rho.factor(), model);
}

SymMatrix d_matrix(const TransformedSample& sample, const CorrelationMatrix& rho,
                   const CopulaModel& model) {
    return detail::d_matrix_given_factor(sample, rho.matrix(), rho.factor(), model);
}

SymMatrix inverse_gradient_direction(const SymMatrix& sigma, const TransformedSample& sample,
                                     const CopulaModel& model) {
    const int d = sigma.dim();
    std::vector<double> diag(d);
    for (int i = 0; i < d; ++i) diag[i] = sigma(i, i);
    const CorrelationMatrix rho = project_to_correlation(sigma);
    return detail::direction_given_factor(diag, rho.matrix(), rho.factor(), sample, model);
}

SymMatrix sigma_gradient(const SymMatrix& sigma, const TransformedSample& sample,
                         const CopulaModel& model) {
    const int d = sigma.dim();
    const SymMatrix v = inverse_gradient_direction(sigma, sample, model);
    const SymMatrix sinv = cholesky(sigma).inverse();

    std::vector<double> tmp(static_cast<std::size_t>(d) * d);
    sym_product(sinv, v, tmp.data());  // tmp = Sigma^{-1} V, general layout

    SymMatrix out(d);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            const double a =
                kernels::dot(tmp.data() + static_cast<std::size_t>(i) * d, sinv.row(j),
                             static_cast<std::size_t>(d));
            const double b =
                kernels::dot(tmp.data() + static_cast<std::size_t>(j) * d, sinv.row(i),
                             static_cast<std::size_t>(d));
            out.set(i, j, 0.5 * (a + b));  // kill roundoff asymmetry
        }
    }
    return out;
}

double projected_log_likelihood(const SymMatrix& sigma, const TransformedSample& sample,
                                const CopulaModel& model) {
    return log_likelihood(sample, project_to_correlation(sigma), model);
}

PseudoSample sample_copula(const CorrelationMatrix& rho, const CopulaModel& model, int n,
                           std::uint64_t rng_seed) {
    if (n < 1) throw DegenerateSample("sample count must be >= 1");
    const int d = rho.dim();
    const CholeskyFactor& f = rho.factor();
    Rng rng(rng_seed);

    const double lo = 1e-300;
    const double hi = std::nextafter(1.0, 0.0);
    const bool is_t = model.is_t();
    const double v = is_t ? model.nu() : 0.0;

    std::vector<double> data(static_cast<std::size_t>(n) * d);
    std::vector<double> z(d);
    for (int t = 0; t < n; ++t) {
        for (int i = 0; i < d; ++i) z[i] = rng.normal();
        double scale = 1.0;
        if (is_t) {
            double c2 = rng.chi_square(v);
            if (!(c2 > 0.0)) c2 = 1e-300;
            scale = std::sqrt(v / c2);
        }
        double* row = data.data() + static_cast<std::size_t>(t) * d;
        for (int i = 0; i < d; ++i) {
            const double y =
                kernels::dot(f.lower.data() + static_cast<std::size_t>(i) * d, z.data(),
                             static_cast<std::size_t>(i) + 1) *
                scale;
            const double u = is_t ? t_cdf(y, Dof(v)) : norm_cdf(y);
            row[i] = std::clamp(u, lo, hi);
        }
    }
    return PseudoSample(n, d, std::move(data));
}

}  // namespace ellcop
