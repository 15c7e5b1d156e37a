#pragma once

#include <cstdint>
#include <vector>

#include "ellcop/linalg.hpp"
#include "ellcop/margins.hpp"

namespace ellcop {

enum class Family { Gaussian, StudentT };

// Elliptical copula family selector; carries degrees of freedom for Student's t.
class CopulaModel {
public:
    static CopulaModel gaussian() { return CopulaModel(Family::Gaussian, 0.0); }
    static CopulaModel student_t(Dof nu) { return CopulaModel(Family::StudentT, nu.nu); }

    Family family() const { return family_; }
    bool is_t() const { return family_ == Family::StudentT; }

    double nu() const {
        if (!is_t()) throw DomainError("degrees of freedom only exist for the Student's t family");
        return nu_;
    }

private:
    CopulaModel(Family f, double nu) : family_(f), nu_(nu) {}

    Family family_;
    double nu_;
};

// Symmetric positive-definite matrix with exact unit diagonal. The Cholesky
// factor is computed once at construction and shared by every density,
// likelihood, and sampler call made with the matrix.
class CorrelationMatrix {
public:
    explicit CorrelationMatrix(SymMatrix m);

    static CorrelationMatrix identity(int dim) { return CorrelationMatrix(SymMatrix::identity(dim)); }

    int dim() const { return m_.dim(); }
    const SymMatrix& matrix() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }
    const CholeskyFactor& factor() const { return chol_; }
    double log_det() const { return chol_.log_det(); }

private:
    SymMatrix m_;
    CholeskyFactor chol_;
};

// n x d copula-scale observations; every entry strictly inside (0,1).
struct PseudoSample {
    int n = 0;
    int d = 0;
    std::vector<double> u;  // row-major

    PseudoSample(int n_, int d_, std::vector<double> data);

    const double* row(int t) const { return u.data() + static_cast<std::size_t>(t) * d; }
    double at(int t, int i) const { return u[static_cast<std::size_t>(t) * d + i]; }
};

// Quantile-transformed observations: g (Gaussian margin) or s (t margin).
struct TransformedSample {
    int n = 0;
    int d = 0;
    std::vector<double> z;  // row-major

    const double* row(int t) const { return z.data() + static_cast<std::size_t>(t) * d; }
    double at(int t, int i) const { return z[static_cast<std::size_t>(t) * d + i]; }
};

// Rescales a positive-definite matrix to unit diagonal:
// result(i,j) = sigma(i,j) / sqrt(sigma(i,i) sigma(j,j)).
// Applying it to a matrix that already has unit diagonal is a bit-for-bit
// no-op (the scale factors are exactly 1).
CorrelationMatrix project_to_correlation(const SymMatrix& sigma);

// Elementwise margin quantile: norm_quantile for Gaussian, t_quantile for t.
TransformedSample transform(const PseudoSample& sample, const CopulaModel& model);

// log c(u; rho) at one transformed observation g:
//   -1/2 log|rho| - 1/2 g' rho^{-1} g + 1/2 g' g
double gaussian_log_density(const std::vector<double>& g_row, const CorrelationMatrix& rho);

// log c(u; rho, nu) at one transformed observation s:
//   log G((nu+d)/2) + (d-1) log G(nu/2) - d log G((nu+1)/2) - 1/2 log|rho|
//   - (nu+d)/2 log(1 + s' rho^{-1} s / nu) + (nu+1)/2 sum_i log(1 + s_i^2/nu)
double t_log_density(const std::vector<double>& s_row, const CorrelationMatrix& rho, Dof nu);

// Sum of per-row log densities. The factorization and log-determinant of rho
// are computed once per call, never per row.
double log_likelihood(const TransformedSample& sample, const CorrelationMatrix& rho,
                      const CopulaModel& model);

// Derivative of the log-likelihood with respect to the entries of rho^{-1}:
//   Gaussian:  (n/2) rho - 1/2 sum_t g_t g_t'
//   Student t: (n/2) rho - (nu+d)/(2 nu) sum_t s_t s_t' / (1 + s_t' rho^{-1} s_t / nu)
SymMatrix d_matrix(const TransformedSample& sample, const CorrelationMatrix& rho,
                   const CopulaModel& model);

// Ascent direction of the projected likelihood with respect to Sigma^{-1},
// with rho = Pi(Sigma) and A = diag(1/sqrt(Sigma_ii)):
//   V = -A^{-1} (D(rho) - rho diag(D(rho) rho^{-1}) rho) A^{-1}
// The iteration Sigma <- Sigma + lambda V ascends L* = L o Pi.
SymMatrix inverse_gradient_direction(const SymMatrix& sigma, const TransformedSample& sample,
                                     const CopulaModel& model);

// Gradient of the projected likelihood in Sigma entries:
//   dL*/dSigma = Sigma^{-1} V Sigma^{-1}  with V as above.
// Used for verification and the naive-gradient baseline only.
SymMatrix sigma_gradient(const SymMatrix& sigma, const TransformedSample& sample,
                         const CopulaModel& model);

// L*(Sigma) = log_likelihood(sample, Pi(Sigma), model).
double projected_log_likelihood(const SymMatrix& sigma, const TransformedSample& sample,
                                const CopulaModel& model);

// Draws n observations from the copula. Gaussian: u_t = Phi(L z_t) with L the
// Cholesky factor of rho and z_t iid standard normal. Student t: the normal
// vector is scaled by sqrt(nu / chi^2_nu) before the t CDF is applied.
// Deterministic given the seed; outputs clamped strictly inside (0,1).
PseudoSample sample_copula(const CorrelationMatrix& rho, const CopulaModel& model, int n,
                           std::uint64_t rng_seed);

namespace detail {

// Factor-level cores shared with the fit loops, which evaluate many candidate
// matrices per iteration and must not refactorize or revalidate per use.

// Rescales to unit diagonal without constructing a CorrelationMatrix.
SymMatrix scale_to_unit_diagonal(const SymMatrix& sigma);

// log_likelihood when the Cholesky factor of rho is already in hand.
double log_likelihood_given_factor(const TransformedSample& sample, const CholeskyFactor& f,
                                   const CopulaModel& model);

// d_matrix when rho's factor is already in hand.
SymMatrix d_matrix_given_factor(const TransformedSample& sample, const SymMatrix& rho,
                                const CholeskyFactor& f, const CopulaModel& model);

// inverse_gradient_direction from rho = Pi(sigma), its factor, and diag(sigma).
SymMatrix direction_given_factor(const std::vector<double>& sigma_diag, const SymMatrix& rho,
                                 const CholeskyFactor& f, const TransformedSample& sample,
                                 const CopulaModel& model);

}  // namespace detail

}  // namespace ellcop
