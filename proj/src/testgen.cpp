#include "ellcop/testgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ellcop/kernels.hpp"
#include "ellcop/rng.hpp"

namespace ellcop {

namespace {

// Haar-distributed orthogonal matrix: modified Gram-Schmidt QR of a square
// standard-normal matrix. MGS yields R with a positive diagonal, which is the
// sign convention that makes Q exactly Haar. Stored row-major; columns are
// the orthonormal vectors.
std::vector<double> haar_orthogonal(int d, Rng& rng) {
    const std::size_t dd = static_cast<std::size_t>(d);
    std::vector<double> q(dd * dd);
    for (int j = 0; j < d; ++j) {
        for (;;) {
            for (int i = 0; i < d; ++i) q[static_cast<std::size_t>(i) * dd + j] = rng.normal();
            for (int k = 0; k < j; ++k) {
                double proj = 0.0;
                for (int i = 0; i < d; ++i)
                    proj += q[static_cast<std::size_t>(i) * dd + k] *
                            q[static_cast<std::size_t>(i) * dd + j];
                for (int i = 0; i < d; ++i)
                    q[static_cast<std::size_t>(i) * dd + j] -=
                        proj * q[static_cast<std::size_t>(i) * dd + k];
            }
            double norm_sq = 0.0;
            for (int i = 0; i < d; ++i) {
                const double v = q[static_cast<std::size_t>(i) * dd + j];
                norm_sq += v * v;
            }
            if (norm_sq > 1e-200) {  // redraw a column that collapsed
                const double inv = 1.0 / std::sqrt(norm_sq);
                for (int i = 0; i < d; ++i) q[static_cast<std::size_t>(i) * dd + j] *= inv;
                break;
            }
        }
    }
    return q;
}

}  // namespace

CorrelationMatrix random_correlation(int dim, std::uint64_t rng_seed) {
    if (dim < 2) throw DomainError("random correlation matrices need dim >= 2");
    Rng rng(rng_seed);

    // Eigenvalues: iid Uniform(0,1) rescaled so they sum to dim; resample if
    // the rescaled spectrum comes out numerically degenerate.
    std::vector<double> lam(dim);
    bool spectrum_ok = false;
    for (int attempt = 0; attempt < 100 && !spectrum_ok; ++attempt) {
        double sum = 0.0;
        for (auto& l : lam) {
            l = rng.uniform01();
            sum += l;
        }
        const double scale = static_cast<double>(dim) / sum;
        double mn = lam[0] * scale;
        for (auto& l : lam) {
            l *= scale;
            mn = std::min(mn, l);
        }
        spectrum_ok = mn >= 1e-12;
    }
    if (!spectrum_ok)
        throw DegenerateSpectrum("rescaled eigenvalue below 1e-12 in 100 consecutive draws");

    // A = O diag(lam) O^T via B = O diag(lam), A_ij = dot(B_i, O_j).
    const std::size_t dd = static_cast<std::size_t>(dim);
    const std::vector<double> o = haar_orthogonal(dim, rng);
    std::vector<double> b(o);
    for (std::size_t i = 0; i < dd; ++i)
        for (std::size_t k = 0; k < dd; ++k) b[i * dd + k] *= lam[k];
    std::vector<double> a(dd * dd);
    for (std::size_t i = 0; i < dd; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = kernels::dot(b.data() + i * dd, o.data() + j * dd, dd);
            a[i * dd + j] = v;
            a[j * dd + i] = v;
        }

    // Diagonal balancing: rotate the smallest diagonal entry against the
    // largest until every entry is 1. Each rotation pins one entry at exactly
    // 1 and leaves the spectrum unchanged.
    for (int step = 0; step < dim - 1; ++step) {
        int i = 0, j = 0;
        for (int k = 1; k < dim; ++k) {
            if (a[static_cast<std::size_t>(k) * dd + k] < a[static_cast<std::size_t>(i) * dd + i])
                i = k;
            if (a[static_cast<std::size_t>(k) * dd + k] > a[static_cast<std::size_t>(j) * dd + j])
                j = k;
        }
        const double alpha = a[static_cast<std::size_t>(i) * dd + i];
        const double beta = a[static_cast<std::size_t>(j) * dd + j];
        if (!(alpha < 1.0) || !(beta > 1.0)) break;
        const double gamma = a[static_cast<std::size_t>(i) * dd + j];

        // Solve t^2 (beta-1) + 2 gamma t + (alpha-1) = 0 for the tangent of
        // the rotation angle; take the smaller-magnitude root through the
        // cancellation-free quadratic form.
        const double disc = gamma * gamma - (beta - 1.0) * (alpha - 1.0);
        const double qq = -(gamma + std::copysign(std::sqrt(disc), gamma));
        const double t = (alpha - 1.0) / qq;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        double* row_i = a.data() + static_cast<std::size_t>(i) * dd;
        double* row_j = a.data() + static_cast<std::size_t>(j) * dd;
        for (int k = 0; k < dim; ++k) {
            const double vi = row_i[k], vj = row_j[k];
            row_i[k] = c * vi + s * vj;
            row_j[k] = c * vj - s * vi;
        }
        for (int k = 0; k < dim; ++k) {
            double* rk = a.data() + static_cast<std::size_t>(k) * dd;
            const double vi = rk[i], vj = rk[j];
            rk[i] = c * vi + s * vj;
            rk[j] = c * vj - s * vi;
        }
        row_i[i] = 1.0;
        row_j[j] = alpha + beta - 1.0;  // exact 2x2 trace, cleaner than the rotated value
        row_j[i] = row_i[j] = 0.5 * (row_i[j] + row_j[i]);
    }

    SymMatrix m(dim);
    for (int i = 0; i < dim; ++i) {
        m.set(i, i, 1.0);
        for (int j = i + 1; j < dim; ++j) m.set(i, j, a[static_cast<std::size_t>(i) * dd + j]);
    }
    return CorrelationMatrix(std::move(m));
}

std::pair<CorrelationMatrix, PseudoSample> generate_case(const CaseSpec& spec) {
    if (spec.dim < 2) throw DomainError("case dimension must be >= 2");
    if (spec.n_obs < 2) throw DomainError("case sample size must be >= 2");
    CorrelationMatrix rho = random_correlation(spec.dim, spec.seed);
    PseudoSample sample =
        sample_copula(rho, spec.model(), spec.n_obs, Rng::derive_seed(spec.seed, 1));
    return {std::move(rho), std::move(sample)};
}

}  // namespace ellcop
