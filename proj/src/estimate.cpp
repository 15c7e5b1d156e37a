#include "ellcop/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "ellcop/kernels.hpp"

namespace ellcop {

namespace {

// Accepted-state bundle for the gradient fits: the working Sigma, its
// projection, the projection's factor, and the likelihood there.
struct SigmaEval {
    SymMatrix sigma;
    SymMatrix rho;
    CholeskyFactor chol;
    double loglik;
};

std::optional<SigmaEval> evaluate_sigma(SymMatrix sigma, const TransformedSample& sample,
                                        const CopulaModel& model) {
    const int d = sigma.dim();
    for (int i = 0; i < d; ++i)
        if (!(sigma(i, i) > 0.0)) return std::nullopt;
    SymMatrix rho = detail::scale_to_unit_diagonal(sigma);
    auto f = try_cholesky(rho);  // Sigma is PD iff diag > 0 and Pi(Sigma) is PD
    if (!f) return std::nullopt;
    const double ll = detail::log_likelihood_given_factor(sample, *f, model);
    return SigmaEval{std::move(sigma), std::move(rho), std::move(*f), ll};
}

StepConfig validated(StepConfig c, int n_obs) {
    if (c.lambda0 == 0.0) c.lambda0 = 1.0 / n_obs;
    if (!(c.lambda0 > 0.0) || !std::isfinite(c.lambda0))
        throw DomainError("lambda0 must be positive and finite");
    if (!(c.k1 > 0.0) || !(c.k1 < 1.0)) throw DomainError("k1 must lie in (0,1)");
    if (!(c.k2 > 1.0) || !std::isfinite(c.k2)) throw DomainError("k2 must exceed 1");
    if (!(c.lambda_min > 0.0) || !(c.lambda_min < c.lambda0))
        throw DomainError("lambda_min must lie in (0, lambda0)");
    if (c.max_iters < 1) throw DomainError("max_iters must be >= 1");
    if (!(c.tol_param > 0.0) || !(c.tol_loglik > 0.0))
        throw DomainError("stopping tolerances must be positive");
    return c;
}

SymMatrix moment_matrix(const TransformedSample& sample) {
    const int d = sample.d;
    std::vector<double> acc(static_cast<std::size_t>(d) * d, 0.0);
    for (int t = 0; t < sample.n; ++t) {
        const double* row = sample.row(t);
        for (int i = 0; i < d; ++i)
            kernels::axpy(row[i], row, acc.data() + static_cast<std::size_t>(i) * d,
                          static_cast<std::size_t>(d));
    }
    const double inv_n = 1.0 / sample.n;
    SymMatrix m(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) m.set(i, j, acc[static_cast<std::size_t>(i) * d + j] * inv_n);
    return m;
}

// Shared harness for the inverse-gradient fit and the naive baseline that
// ascends in Sigma^{-1} coordinates. Only the candidate construction differs.
FitResult run_gradient_fit(const TransformedSample& sample, const CopulaModel& model,
                           const StepConfig& cfg_in, bool naive_coordinates) {
    const StepConfig cfg = validated(cfg_in, sample.n);

    SymMatrix seed = initial_sigma(sample);
    auto cur_opt = evaluate_sigma(seed, sample, model);
    if (!cur_opt) throw DegenerateSample("initial seed matrix failed the definiteness check");
    SigmaEval cur = std::move(*cur_opt);

    std::vector<TraceEntry> trace;
    trace.push_back({0, 0.0, cur.loglik});

    double lambda = cfg.lambda0;
    FitStatus status = FitStatus::MaxIters;
    int iterations = 0;

    std::vector<double> diag(sample.d);
    for (int m = 1; m <= cfg.max_iters; ++m) {
        for (int i = 0; i < sample.d; ++i) diag[i] = cur.sigma(i, i);
        const SymMatrix v = detail::direction_given_factor(diag, cur.rho, cur.chol, sample, model);

        if (v.max_abs() <= cfg.tol_param * std::max(1.0, cur.sigma.max_abs())) {
            status = FitStatus::Converged;  // the direction itself has vanished
            break;
        }

        std::optional<SymMatrix> inv_sigma;  // Sigma^{-1}, only for the naive update
        if (naive_coordinates) inv_sigma = cholesky(cur.sigma).inverse();

        std::optional<SigmaEval> best;
        double best_lambda = 0.0;
        bool accepted = false;
        while (!accepted) {
            for (double factor : {cfg.k1, 1.0, cfg.k2}) {
                const double cl = factor * lambda;
                std::optional<SigmaEval> cand;
                if (naive_coordinates) {
                    const SymMatrix p_cand = add_scaled(*inv_sigma, -cl, v);
                    if (auto pf = try_cholesky(p_cand))
                        cand = evaluate_sigma(pf->inverse(), sample, model);
                } else {
                    cand = evaluate_sigma(add_scaled(cur.sigma, cl, v), sample, model);
                }
                if (!cand || !(cand->loglik > cur.loglik)) continue;  // both conditions
                if (!best || cand->loglik > best->loglik + 1e-13 ||
                    (std::fabs(cand->loglik - best->loglik) <= 1e-13 && cl > best_lambda)) {
                    best = std::move(cand);
                    best_lambda = cl;
                }
            }
            if (best) {
                accepted = true;
                break;
            }
            lambda *= cfg.k1;
            if (lambda < cfg.lambda_min) break;
        }
        if (!accepted) {
            status = FitStatus::StepUnderflow;
            break;
        }

        const double prev_loglik = cur.loglik;
        const double rho_change = max_abs_diff(best->rho, cur.rho);
        cur = std::move(*best);
        lambda = best_lambda;
        iterations = m;
        trace.push_back({m, best_lambda, cur.loglik});

        if (rho_change < cfg.tol_param || std::fabs(cur.loglik - prev_loglik) < cfg.tol_loglik) {
            status = FitStatus::Converged;
            break;
        }
    }

    return FitResult{CorrelationMatrix(std::move(cur.rho)), cur.loglik, iterations, status,
                     std::move(trace), std::move(seed)};
}

}  // namespace

const char* to_string(FitStatus s) {
    switch (s) {
        case FitStatus::Converged: return "Converged";
        case FitStatus::MaxIters: return "MaxIters";
        case FitStatus::StepUnderflow: return "StepUnderflow";
        case FitStatus::Diverged: return "Diverged";
    }
    return "Unknown";
}

SymMatrix initial_sigma(const TransformedSample& sample) {
    if (sample.d < 2) throw DegenerateSample("correlation estimation needs d >= 2 columns");
    if (sample.n < 2) throw DegenerateSample("initial seed needs n >= 2 observations");
    SymMatrix m = moment_matrix(sample);
    if (try_cholesky(m)) return m;
    const double eps = 1e-8 * (m.trace() / m.dim());
    SymMatrix ridged = add_scaled(m, eps, SymMatrix::identity(m.dim()));
    if (try_cholesky(ridged)) return ridged;
    throw DegenerateSample("moment matrix is singular even after ridge regularization");
}

SymMatrix gaussian_closed_form_sigma(const TransformedSample& sample) {
    return initial_sigma(sample);
}

FitResult fit_approximate(const TransformedSample& sample, const CopulaModel& model, int max_iters,
                          double tol) {
    if (max_iters < 1) throw DomainError("max_iters must be >= 1");
    if (!(tol > 0.0)) throw DomainError("tol must be positive");

    SymMatrix seed = initial_sigma(sample);

    if (!model.is_t()) {
        CorrelationMatrix rho = project_to_correlation(seed);
        const double ll = log_likelihood(sample, rho, model);
        return FitResult{std::move(rho),
                         ll,
                         0,
                         FitStatus::Converged,
                         {TraceEntry{0, 0.0, ll}},
                         std::move(seed)};
    }

    const double v = model.nu();
    const int d = sample.d;
    const int n = sample.n;

    SymMatrix rho = detail::scale_to_unit_diagonal(seed);
    CholeskyFactor chol = cholesky(rho);
    double loglik = detail::log_likelihood_given_factor(sample, chol, model);

    std::vector<TraceEntry> trace;
    trace.push_back({0, 0.0, loglik});

    FitStatus status = FitStatus::MaxIters;
    int iterations = 0;

    std::vector<double> acc(static_cast<std::size_t>(d) * d);
    std::vector<double> w(d);
    for (int m = 1; m <= max_iters; ++m) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int t = 0; t < n; ++t) {
            const double* row = sample.row(t);
            std::copy(row, row + d, w.begin());
            chol.solve_lower(w.data());
            const double q = kernels::sum_sq(w.data(), static_cast<std::size_t>(d));
            const double wt = 1.0 / (1.0 + q / v);
            for (int i = 0; i < d; ++i)
                kernels::axpy(wt * row[i], row, acc.data() + static_cast<std::size_t>(i) * d,
                              static_cast<std::size_t>(d));
        }
        const double scale = (1.0 + static_cast<double>(d) / v) / n;
        SymMatrix next(d);
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j)
                next.set(i, j, scale * acc[static_cast<std::size_t>(i) * d + j]);

        bool bad_diag = false;
        for (int i = 0; i < d; ++i)
            if (!(next(i, i) > 0.0)) bad_diag = true;
        std::optional<CholeskyFactor> f;
        SymMatrix rho_next(d);
        if (!bad_diag) {
            rho_next = detail::scale_to_unit_diagonal(next);
            f = try_cholesky(rho_next);
        }
        if (!f) {
            status = FitStatus::Diverged;
            iterations = m;
            break;
        }

        const double change = max_abs_diff(rho_next, rho);
        rho = std::move(rho_next);
        chol = std::move(*f);
        loglik = detail::log_likelihood_given_factor(sample, chol, model);
        iterations = m;
        trace.push_back({m, 0.0, loglik});

        if (change < tol) {
            status = FitStatus::Converged;
            break;
        }
    }

    return FitResult{CorrelationMatrix(std::move(rho)), loglik, iterations, status,
                     std::move(trace), std::move(seed)};
}

FitResult fit_inverse_gradient(const TransformedSample& sample, const CopulaModel& model,
                               const StepConfig& cfg) {
    return run_gradient_fit(sample, model, cfg, false);
}

FitResult fit_naive_gradient(const TransformedSample& sample, const CopulaModel& model,
                             const StepConfig& cfg) {
    return run_gradient_fit(sample, model, cfg, true);
}

std::pair<FitResult, Dof> fit_t_full(const PseudoSample& sample,
                                     std::pair<double, double> nu_bracket, const StepConfig& cfg) {
    const double lo = nu_bracket.first;
    const double hi = nu_bracket.second;
    if (!(lo > 0.0) || !(lo < hi)) throw DomainError("nu bracket must satisfy 0 < lo < hi");

    std::optional<std::pair<double, FitResult>> best;
    auto eval = [&](double nu) -> double {
        FitResult fit =
            fit_inverse_gradient(transform(sample, CopulaModel::student_t(Dof(nu))),
                                 CopulaModel::student_t(Dof(nu)), cfg);
        const double ll = fit.loglik;
        if (!best || ll > best->second.loglik) best = {nu, std::move(fit)};
        return ll;
    };

    const double f_lo = eval(lo);
    const double f_hi = eval(hi);

    const double phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = eval(x1);
    double f2 = eval(x2);

    if (f_lo > std::max(f1, f2) && f_hi > std::max(f1, f2))
        throw BracketError("profile likelihood is higher at both bracket endpoints than in the interior");

    for (int it = 0; it < 300; ++it) {
        if (b - a <= 1e-3 * best->first) break;
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = eval(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = eval(x1);
        }
    }

    Dof nu_hat(best->first);
    return {std::move(best->second), nu_hat};
}

}  // namespace ellcop
