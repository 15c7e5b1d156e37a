#pragma once

#include <utility>
#include <vector>

#include "ellcop/copula.hpp"

namespace ellcop {

// Adaptive-step controls for the iterative fits. lambda0 = 0 means "choose
// 1/n from the sample at fit time", the recommended default.
struct StepConfig {
    double lambda0 = 0.0;
    double k1 = 0.5;
    double k2 = 4.0 / 3.0;
    double lambda_min = 1e-14;
    int max_iters = 10000;
    double tol_param = 1e-9;
    double tol_loglik = 1e-11;

    static StepConfig defaults_for(int n_obs) {
        StepConfig c;
        c.lambda0 = 1.0 / n_obs;
        return c;
    }
};

enum class FitStatus { Converged, MaxIters, StepUnderflow, Diverged };

const char* to_string(FitStatus s);

// One accepted iteration: the step size used and the log-likelihood reached.
// Entry 0 records the starting point with lambda = 0.
struct TraceEntry {
    int iteration;
    double lambda;
    double loglik;
};

struct FitResult {
    CorrelationMatrix rho_hat;
    double loglik;
    int iterations;
    FitStatus status;
    std::vector<TraceEntry> lambda_trace;
    SymMatrix seed_sigma;
};

// Moment matrix (1/n) sum_t g_t g_t', ridge-regularized by eps*I with
// eps = 1e-8 * trace/d if its Cholesky fails, retried once.
SymMatrix initial_sigma(const TransformedSample& sample);

// The exact unconstrained Gaussian maximizer — the same computation as
// initial_sigma, exposed under its estimation role.
SymMatrix gaussian_closed_form_sigma(const TransformedSample& sample);

// Fixed-point baseline. Gaussian: one-shot projection of the closed form.
// Student t: iterate
//   Sigma_{m+1} = (1 + d/nu) (1/n) sum_t s_t s_t' / (1 + s_t' rho_m^{-1} s_t / nu)
//   rho_{m+1} = Pi(Sigma_{m+1})
// from Pi(initial_sigma) until the max-abs rho change drops below tol.
// A non-PD iterate yields status Diverged; hitting max_iters yields MaxIters.
FitResult fit_approximate(const TransformedSample& sample, const CopulaModel& model,
                          int max_iters = 10000, double tol = 1e-9);

// The exact method: ascend L* = L o Pi over unconstrained PD Sigma,
//   Sigma_{m+1} = Sigma_m + lambda V,  V = inverse_gradient_direction,
// with adaptive lambda: candidates {k1 l, l, k2 l}, accept the
// highest-likelihood candidate that keeps Sigma PD and strictly increases L*
// (ties within 1e-13 go to the larger lambda); if none qualifies shrink
// lambda by k1 and retry, aborting below lambda_min. Returns Pi(Sigma_final).
FitResult fit_inverse_gradient(const TransformedSample& sample, const CopulaModel& model,
                               const StepConfig& cfg);

// Comparison baseline: plain gradient ascent in the coordinates of
// Sigma^{-1} (P_{m+1} = P_m + lambda dL*/dSigma^{-1}), same step adaptation
// and stopping rules as fit_inverse_gradient.
FitResult fit_naive_gradient(const TransformedSample& sample, const CopulaModel& model,
                             const StepConfig& cfg);

// Profile-likelihood estimation of nu by golden-section search over
// [bracket.first, bracket.second]; each probe re-transforms the sample and
// runs fit_inverse_gradient. Terminates when the bracket width falls below
// 1e-3 * nu_hat. Throws BracketError if the profile is higher at both
// endpoints than anywhere in the interior after the initial probes.
std::pair<FitResult, Dof> fit_t_full(const PseudoSample& sample,
                                     std::pair<double, double> nu_bracket, const StepConfig& cfg);

}  // namespace ellcop
