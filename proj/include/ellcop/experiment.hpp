#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ellcop/estimate.hpp"
#include "ellcop/testgen.hpp"

namespace ellcop {

// Sweep over (dimension, degrees-of-freedom) cells: for each cell,
// cases_per_cell random correlation matrices are drawn, a t-copula sample of
// n_obs rows is generated from each, and both estimators are fit with the
// case's known nu. Everything is deterministic given seed.
struct ExperimentConfig {
    std::vector<int> dims = {2, 10, 25};
    std::vector<double> nus = {0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
    int cases_per_cell = 10;
    int n_obs = 100;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct ExperimentRecord {
    long case_id = 0;
    int d = 0;
    double nu = 0.0;
    std::uint64_t seed = 0;
    double min_eig = 0.0;          // smallest eigenvalue of the generating matrix
    double loglik_ig = 0.0;
    double loglik_approx = 0.0;
    double norm_diff = 0.0;        // (loglik_ig - loglik_approx) / n_obs
    FitStatus status_ig = FitStatus::Diverged;
    FitStatus status_approx = FitStatus::Diverged;
    int iters_ig = 0;
    int iters_approx = 0;
};

// Full per-case outcome, with the fits kept for trace replay.
struct CaseOutcome {
    ExperimentRecord record;
    FitResult fit_ig;
    FitResult fit_approx;
};

struct CaseTask {
    long case_id;
    int d;
    double nu;
    int n_obs;
    std::uint64_t seed;  // per-case stream derived from the sweep seed
};

// Deterministic enumeration of the sweep's work items: dims outer, nus
// inner, cases_per_cell innermost; case ids are consecutive from 0.
std::vector<CaseTask> enumerate_cases(const ExperimentConfig& cfg);

CaseOutcome run_case(const CaseTask& task);

struct CellSummary {
    int d = 0;
    double nu = 0.0;
    int cases = 0;
    int converged_pairs = 0;       // both fits converged; stats below use these
    double mean_norm_diff = 0.0;
    double p5_norm_diff = 0.0;
    double p95_norm_diff = 0.0;
    double nonconv_rate_ig = 0.0;
    double nonconv_rate_approx = 0.0;
};

struct ExperimentResult {
    std::vector<ExperimentRecord> records;  // in case_id order
    std::vector<CellSummary> cells;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Summaries recomputed from any record set (used by run_experiment itself).
std::vector<CellSummary> summarize_cells(const ExperimentConfig& cfg,
                                         const std::vector<ExperimentRecord>& records);

std::string experiment_csv_header();
std::string to_csv_row(const ExperimentRecord& r);

}  // namespace ellcop
