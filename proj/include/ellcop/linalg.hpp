#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ellcop/errors.hpp"

namespace ellcop {

// Dense symmetric matrix, full row-major storage. Symmetry is maintained by
// construction: set() writes both mirror entries, and from_rows() validates.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, 0.0) {
        if (dim < 1) throw DimensionError("SymMatrix dimension must be >= 1");
    }

    static SymMatrix identity(int dim) {
        SymMatrix m(dim);
        for (int i = 0; i < dim; ++i) m.a_[static_cast<std::size_t>(i) * dim + i] = 1.0;
        return m;
    }

    // Validates squareness, symmetry and finiteness of externally supplied data.
    static SymMatrix from_rows(const std::vector<std::vector<double>>& rows);

    int dim() const { return dim_; }

    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }

    void set(int i, int j, double v) {
        a_[static_cast<std::size_t>(i) * dim_ + j] = v;
        a_[static_cast<std::size_t>(j) * dim_ + i] = v;
    }

    const double* data() const { return a_.data(); }
    double* data() { return a_.data(); }
    const double* row(int i) const { return a_.data() + static_cast<std::size_t>(i) * dim_; }

    double trace() const;
    double max_abs() const;
    double max_diag() const;

    bool all_finite() const;

private:
    int dim_ = 0;
    std::vector<double> a_;
};

struct CholeskyFactor {
    int dim = 0;
    std::vector<double> lower;  // row-major, entries above the diagonal are zero

    double at(int i, int j) const { return lower[static_cast<std::size_t>(i) * dim + j]; }

    // log|M| = 2 * sum(log L_ii)
    double log_det() const;

    // Solves L y = x in place.
    void solve_lower(double* x) const;
    // Solves L^T y = x in place.
    void solve_lower_transposed(double* x) const;

    // x^T M^{-1} x via two triangular solves.
    double quad_form_inv(const double* x) const;

    // Reconstructs M^{-1} = L^{-T} L^{-1}.
    SymMatrix inverse() const;
};

struct EigenDecomposition {
    std::vector<double> values;   // descending
    std::vector<double> vectors;  // row-major d x d; column k is the k-th eigenvector

    int dim() const { return static_cast<int>(values.size()); }
    double vec(int i, int k) const { return vectors[static_cast<std::size_t>(i) * values.size() + k]; }
};

// Pivot tolerance: a Cholesky pivot must exceed 1e-12 * max diagonal entry.
inline constexpr double kPdTolerance = 1e-12;

// Returns nothing if the matrix is not numerically positive-definite; the
// failing pivot index is reported through failed_pivot when supplied.
std::optional<CholeskyFactor> try_cholesky(const SymMatrix& m, int* failed_pivot = nullptr);

// Throwing variant; NotPositiveDefinite carries the pivot index.
CholeskyFactor cholesky(const SymMatrix& m);

// (M^{-1}, log|M|) via Cholesky.
std::pair<SymMatrix, double> inverse_and_logdet(const SymMatrix& m);

// Cyclic Jacobi eigendecomposition, eigenvalues sorted descending.
EigenDecomposition sym_eigen(const SymMatrix& m);

// Helpers shared by the estimators.
SymMatrix add_scaled(const SymMatrix& a, double alpha, const SymMatrix& b);  // a + alpha*b
double max_abs_diff(const SymMatrix& a, const SymMatrix& b);

// C = A * B for symmetric A, B (result is general; only used where the
// product is known to be symmetric or where the full product is needed).
void sym_product(const SymMatrix& a, const SymMatrix& b, double* out);

}  // namespace ellcop
