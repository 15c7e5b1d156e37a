#include "ellcop/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ellcop/kernels.hpp"

namespace ellcop {

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const int d = static_cast<int>(rows.size());
    if (d < 1) throw DimensionError("empty matrix");
    SymMatrix m(d);
    for (int i = 0; i < d; ++i) {
        if (static_cast<int>(rows[i].size()) != d)
            throw DimensionError("matrix is not square at row " + std::to_string(i));
        for (int j = 0; j < d; ++j) {
            if (!std::isfinite(rows[i][j]))
                throw DomainError("non-finite matrix entry at (" + std::to_string(i) + "," +
                                  std::to_string(j) + ")");
            m.a_[static_cast<std::size_t>(i) * d + j] = rows[i][j];
        }
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (m(i, j) != m(j, i))
                throw DomainError("matrix is not symmetric at (" + std::to_string(i) + "," +
                                  std::to_string(j) + ")");
    return m;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
}

double SymMatrix::max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::fabs(v));
    return m;
}

double SymMatrix::max_diag() const {
    double m = 0.0;
    for (int i = 0; i < dim_; ++i) m = std::max(m, (*this)(i, i));
    return m;
}

bool SymMatrix::all_finite() const {
    for (double v : a_)
        if (!std::isfinite(v)) return false;
    return true;
}

double CholeskyFactor::log_det() const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += std::log(at(i, i));
    return 2.0 * s;
}

void CholeskyFactor::solve_lower(double* x) const {
    for (int i = 0; i < dim; ++i) {
        const double* li = lower.data() + static_cast<std::size_t>(i) * dim;
        x[i] = (x[i] - kernels::dot(li, x, static_cast<std::size_t>(i))) / li[i];
    }
}

void CholeskyFactor::solve_lower_transposed(double* x) const {
    for (int i = dim - 1; i >= 0; --i) {
        double s = x[i];
        for (int k = i + 1; k < dim; ++k) s -= at(k, i) * x[k];
        x[i] = s / at(i, i);
    }
}

double CholeskyFactor::quad_form_inv(const double* x) const {
    std::vector<double> w(x, x + dim);
    solve_lower(w.data());
    return kernels::sum_sq(w.data(), static_cast<std::size_t>(dim));
}

SymMatrix CholeskyFactor::inverse() const {
    // Columns of L^{-1} by forward substitution, then M^{-1} = L^{-T} L^{-1}.
    const int d = dim;
    std::vector<double> linv(static_cast<std::size_t>(d) * d, 0.0);
    std::vector<double> col(d);
    for (int j = 0; j < d; ++j) {
        std::fill(col.begin(), col.end(), 0.0);
        col[j] = 1.0;
        solve_lower(col.data());
        for (int i = j; i < d; ++i) linv[static_cast<std::size_t>(i) * d + j] = col[i];
    }
    SymMatrix out(d);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            // (L^{-T} L^{-1})_{ij} = sum_k Linv_{ki} Linv_{kj}, k >= max(i,j)
            double s = 0.0;
            for (int k = j; k < d; ++k)
                s += linv[static_cast<std::size_t>(k) * d + i] * linv[static_cast<std::size_t>(k) * d + j];
            out.set(i, j, s);
        }
    }
    return out;
}

std::optional<CholeskyFactor> try_cholesky(const SymMatrix& m, int* failed_pivot) {
    const int d = m.dim();
    if (!m.all_finite()) {
        if (failed_pivot) *failed_pivot = 0;
        return std::nullopt;
    }
    const double pivot_floor = kPdTolerance * std::max(m.max_diag(), 0.0);
    CholeskyFactor f;
    f.dim = d;
    f.lower.assign(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) {
        double* li = f.lower.data() + static_cast<std::size_t>(i) * d;
        for (int j = 0; j < i; ++j) {
            const double* lj = f.lower.data() + static_cast<std::size_t>(j) * d;
            li[j] = (m(i, j) - kernels::dot(li, lj, static_cast<std::size_t>(j))) / lj[j];
        }
        const double pivot = m(i, i) - kernels::sum_sq(li, static_cast<std::size_t>(i));
        if (!(pivot > pivot_floor)) {
            if (failed_pivot) *failed_pivot = i;
            return std::nullopt;
        }
        li[i] = std::sqrt(pivot);
    }
    return f;
}

CholeskyFactor cholesky(const SymMatrix& m) {
    int pivot = -1;
    auto f = try_cholesky(m, &pivot);
    if (!f) throw NotPositiveDefinite(pivot);
    return std::move(*f);
}

std::pair<SymMatrix, double> inverse_and_logdet(const SymMatrix& m) {
    CholeskyFactor f = cholesky(m);
    return {f.inverse(), f.log_det()};
}

EigenDecomposition sym_eigen(const SymMatrix& m) {
    const int d = m.dim();
    std::vector<double> a(m.data(), m.data() + static_cast<std::size_t>(d) * d);
    std::vector<double> v(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i) * d + i] = 1.0;

    auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * d + j]; };
    auto V = [&](int i, int j) -> double& { return v[static_cast<std::size_t>(i) * d + j]; };

    double fro = 0.0;
    for (double x : a) fro += x * x;
    fro = std::sqrt(fro);
    const double stop = 1e-15 * std::max(fro, 1e-300);

    const int kMaxSweeps = 100;
    int sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += A(p, q) * A(p, q);
        off = std::sqrt(2.0 * off);
        if (off <= stop) break;

        for (int p = 0; p < d; ++p) {
            for (int q = p + 1; q < d; ++q) {
                const double apq = A(p, q);
                if (std::fabs(apq) <= 1e-300) continue;
                const double app = A(p, p), aqq = A(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                A(p, p) = app - t * apq;
                A(q, q) = aqq + t * apq;
                A(p, q) = 0.0;
                A(q, p) = 0.0;
                for (int k = 0; k < d; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(p, k) = A(k, p);
                    A(k, q) = s * akp + c * akq;
                    A(q, k) = A(k, q);
                }
                for (int k = 0; k < d; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (sweep >= kMaxSweeps)
        throw ConvergenceFailure("Jacobi eigensolver exceeded its sweep limit");

    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return A(x, x) > A(y, y); });

    EigenDecomposition e;
    e.values.resize(d);
    e.vectors.resize(static_cast<std::size_t>(d) * d);
    for (int k = 0; k < d; ++k) {
        e.values[k] = A(order[k], order[k]);
        for (int i = 0; i < d; ++i)
            e.vectors[static_cast<std::size_t>(i) * d + k] = V(i, order[k]);
    }
    return e;
}

SymMatrix add_scaled(const SymMatrix& a, double alpha, const SymMatrix& b) {
    const int d = a.dim();
    if (b.dim() != d) throw DimensionError("dimension mismatch in add_scaled");
    SymMatrix out(d);
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    const std::size_t n = static_cast<std::size_t>(d) * d;
    for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] + alpha * pb[i];
    return out;
}

double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
    if (b.dim() != a.dim()) throw DimensionError("dimension mismatch in max_abs_diff");
    const std::size_t n = static_cast<std::size_t>(a.dim()) * a.dim();
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    return m;
}

void sym_product(const SymMatrix& a, const SymMatrix& b, double* out) {
    const int d = a.dim();
    for (int i = 0; i < d; ++i) {
        const double* arow = a.row(i);
        double* orow = out + static_cast<std::size_t>(i) * d;
        for (int j = 0; j < d; ++j) {
            // b is symmetric, so column j equals row j
            orow[j] = kernels::dot(arow, b.row(j), static_cast<std::size_t>(d));
        }
    }
}

}  // namespace ellcop
