// Command-line surface: fit / sample / gen-corr / experiment / bench.
// Exit codes: 0 success (fit: Converged), 2 fit did not converge, 1 input or
// usage errors. All randomness flows from --seed; identical invocations give
// identical outputs apart from the timing fields in the manifest.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ellcop/experiment.hpp"
#include "ellcop/io.hpp"
#include "ellcop/kernels.hpp"
#include "ellcop/rng.hpp"
#include "ellcop/version.hpp"

namespace {

using namespace ellcop;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Json matrix_json(const SymMatrix& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.dim(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.dim(); ++j) row.push(m(i, j));
        rows.push(std::move(row));
    }
    return rows;
}

Json trace_json(const std::vector<TraceEntry>& trace) {
    Json arr = Json::array();
    for (const auto& e : trace) {
        Json entry = Json::object();
        entry.set("iteration", e.iteration).set("lambda", e.lambda).set("loglik", e.loglik);
        arr.push(std::move(entry));
    }
    return arr;
}

Json manifest_json(const std::string& command, Json params, Json seeds, Json timings) {
    Json m = Json::object();
    m.set("command", command)
        .set("params", std::move(params))
        .set("seeds", std::move(seeds))
        .set("version", kVersion)
        .set("kernel_backend", std::string(kernels::backend_name(kernels::active_backend())))
        .set("timings_ms", std::move(timings));
    return m;
}

void emit(const std::string& out_path, const Json& doc) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty())
        std::fputs(text.c_str(), stdout);
    else
        write_text_file_atomic(out_path, text);
}

int jobs_default() {
    if (const char* env = std::getenv("ELLCOP_JOBS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

struct FitArgs {
    std::string input;
    std::string format = "uniform";
    std::string family = "gaussian";
    double nu = 0.0;
    bool nu_set = false;
    std::string method = "ig";
    double nu_lo = 0.5, nu_hi = 200.0;
    StepConfig cfg;
    int approx_max_iters = 10000;
    double approx_tol = 1e-9;
    std::uint64_t seed = 0;
    std::string out;
    bool trace = false;
};

int run_fit(const FitArgs& a) {
    if (a.family == "t" && !a.nu_set && a.method != "full-t") {
        std::fprintf(stderr, "fit: --family t requires --nu unless --method full-t\n");
        return 1;
    }
    if (a.method == "full-t" && a.family != "t") {
        std::fprintf(stderr, "fit: --method full-t requires --family t\n");
        return 1;
    }
    if (a.family == "gaussian" && a.nu_set) {
        std::fprintf(stderr, "fit: --nu is only meaningful with --family t\n");
        return 1;
    }

    const auto t0 = Clock::now();
    IngestResult ingest = ingest_csv(
        a.input, a.format == "ranks" ? IngestFormat::Ranks : IngestFormat::Uniform);
    const double ingest_ms = ms_since(t0);

    Json result = Json::object();
    const auto t1 = Clock::now();
    FitResult fit = [&]() -> FitResult {
        if (a.method == "full-t") {
            auto [res, nu_hat] = fit_t_full(ingest.sample, {a.nu_lo, a.nu_hi}, a.cfg);
            result.set("nu_hat", nu_hat.nu);
            return std::move(res);
        }
        const CopulaModel model =
            a.family == "t" ? CopulaModel::student_t(Dof(a.nu)) : CopulaModel::gaussian();
        const TransformedSample z = transform(ingest.sample, model);
        if (a.method == "approx") return fit_approximate(z, model, a.approx_max_iters, a.approx_tol);
        if (a.method == "naive") return fit_naive_gradient(z, model, a.cfg);
        return fit_inverse_gradient(z, model, a.cfg);
    }();
    const double fit_ms = ms_since(t1);

    result.set("rho_hat", matrix_json(fit.rho_hat.matrix()))
        .set("loglik", fit.loglik)
        .set("iterations", fit.iterations)
        .set("status", to_string(fit.status))
        .set("n_obs", ingest.sample.n)
        .set("dim", ingest.sample.d)
        .set("clamped_entries", ingest.clamped);
    if (a.trace) result.set("lambda_trace", trace_json(fit.lambda_trace));

    Json params = Json::object();
    params.set("input", a.input)
        .set("format", a.format)
        .set("family", a.family)
        .set("method", a.method);
    if (a.nu_set) params.set("nu", a.nu);
    if (a.method == "full-t") params.set("nu_lo", a.nu_lo).set("nu_hi", a.nu_hi);
    params.set("lambda0", a.cfg.lambda0)
        .set("k1", a.cfg.k1)
        .set("k2", a.cfg.k2)
        .set("lambda_min", a.cfg.lambda_min)
        .set("max_iters", a.cfg.max_iters)
        .set("tol_param", a.cfg.tol_param)
        .set("tol_loglik", a.cfg.tol_loglik);
    Json seeds = Json::object();
    seeds.set("seed", a.seed);
    Json timings = Json::object();
    timings.set("ingest", ingest_ms).set("fit", fit_ms);
    result.set("manifest", manifest_json("fit", std::move(params), std::move(seeds),
                                         std::move(timings)));

    emit(a.out, result);
    return fit.status == FitStatus::Converged ? 0 : 2;
}

struct SampleArgs {
    int dim = 0;
    std::string corr_path;
    std::string family = "gaussian";
    double nu = 0.0;
    bool nu_set = false;
    int n = 100;
    std::uint64_t seed = 0;
    std::string out;
};

int run_sample(const SampleArgs& a) {
    if (a.family == "t" && !a.nu_set) {
        std::fprintf(stderr, "sample: --family t requires --nu\n");
        return 1;
    }
    if (a.corr_path.empty() && a.dim < 2) {
        std::fprintf(stderr, "sample: pass --corr FILE or --dim D (D >= 2)\n");
        return 1;
    }

    const auto t0 = Clock::now();
    CorrelationMatrix rho = a.corr_path.empty()
                                ? random_correlation(a.dim, Rng::derive_seed(a.seed, 0))
                                : CorrelationMatrix(read_matrix_csv(a.corr_path));
    const CopulaModel model =
        a.family == "t" ? CopulaModel::student_t(Dof(a.nu)) : CopulaModel::gaussian();
    PseudoSample sample = sample_copula(rho, model, a.n, Rng::derive_seed(a.seed, 1));
    const double total_ms = ms_since(t0);

    write_sample_csv(a.out, sample);

    Json params = Json::object();
    if (!a.corr_path.empty())
        params.set("corr", a.corr_path);
    else
        params.set("dim", a.dim);
    params.set("family", a.family);
    if (a.nu_set) params.set("nu", a.nu);
    params.set("n", a.n).set("out", a.out);
    Json seeds = Json::object();
    seeds.set("seed", a.seed);
    Json timings = Json::object();
    timings.set("total", total_ms);
    Json manifest = Json::object();
    manifest.set("manifest",
                 manifest_json("sample", std::move(params), std::move(seeds), std::move(timings)));
    write_text_file_atomic(a.out + ".manifest.json", manifest.dump(2) + "\n");
    return 0;
}

struct GenCorrArgs {
    int dim = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int run_gen_corr(const GenCorrArgs& a) {
    const auto t0 = Clock::now();
    CorrelationMatrix rho = random_correlation(a.dim, a.seed);
    EigenDecomposition eig = sym_eigen(rho.matrix());
    const double total_ms = ms_since(t0);

    write_matrix_csv(a.out, rho.matrix());

    Json spectrum = Json::array();
    for (double l : eig.values) spectrum.push(l);
    Json params = Json::object();
    params.set("dim", a.dim).set("out", a.out);
    Json seeds = Json::object();
    seeds.set("seed", a.seed);
    Json timings = Json::object();
    timings.set("total", total_ms);
    Json manifest = Json::object();
    manifest
        .set("manifest",
             manifest_json("gen-corr", std::move(params), std::move(seeds), std::move(timings)))
        .set("spectrum", std::move(spectrum));
    write_text_file_atomic(a.out + ".manifest.json", manifest.dump(2) + "\n");
    return 0;
}

struct ExperimentArgs {
    ExperimentConfig cfg;
    std::string out;
    std::string summary;
};

int run_experiment_cmd(const ExperimentArgs& a) {
    const auto t0 = Clock::now();
    ExperimentResult result = run_experiment(a.cfg);
    const double sweep_ms = ms_since(t0);

    std::string csv = experiment_csv_header() + "\n";
    for (const auto& rec : result.records) csv += to_csv_row(rec) + "\n";
    write_text_file_atomic(a.out, csv);

    Json cells = Json::array();
    for (const auto& c : result.cells) {
        Json cell = Json::object();
        cell.set("d", c.d)
            .set("nu", c.nu)
            .set("cases", c.cases)
            .set("converged_pairs", c.converged_pairs)
            .set("mean_norm_diff", c.mean_norm_diff)
            .set("p5_norm_diff", c.p5_norm_diff)
            .set("p95_norm_diff", c.p95_norm_diff)
            .set("nonconv_rate_ig", c.nonconv_rate_ig)
            .set("nonconv_rate_approx", c.nonconv_rate_approx);
        cells.push(std::move(cell));
    }
    Json dims = Json::array();
    for (int d : a.cfg.dims) dims.push(d);
    Json nus = Json::array();
    for (double v : a.cfg.nus) nus.push(v);
    Json params = Json::object();
    params.set("dims", std::move(dims))
        .set("nus", std::move(nus))
        .set("cases_per_cell", a.cfg.cases_per_cell)
        .set("n_obs", a.cfg.n_obs)
        .set("jobs", a.cfg.jobs)
        .set("records", a.out);
    Json seeds = Json::object();
    seeds.set("seed", a.cfg.seed);
    Json timings = Json::object();
    timings.set("sweep", sweep_ms);
    Json summary = Json::object();
    summary
        .set("manifest",
             manifest_json("experiment", std::move(params), std::move(seeds), std::move(timings)))
        .set("cells", std::move(cells));
    write_text_file_atomic(a.summary, summary.dump(2) + "\n");
    return 0;
}

struct BenchArgs {
    int dim = 25;
    int n_obs = 100;
    double nu = 5.0;
    int repeats = 10;
    std::uint64_t seed = 0;
    std::string out;
};

int run_bench(const BenchArgs& a) {
    if (a.repeats < 1) {
        std::fprintf(stderr, "bench: --repeats must be >= 1\n");
        return 1;
    }
    CaseSpec spec;
    spec.dim = a.dim;
    spec.nu = a.nu;
    spec.n_obs = a.n_obs;
    spec.seed = a.seed;
    auto [rho, sample] = generate_case(spec);  // excluded from the timing below
    const CopulaModel model = spec.model();
    const TransformedSample z = transform(sample, model);

    Json times = Json::array();
    std::vector<double> samples_ms;
    double loglik = 0.0;
    const char* status = "";
    for (int r = 0; r < a.repeats; ++r) {
        const auto t0 = Clock::now();
        FitResult fit = fit_inverse_gradient(z, model, StepConfig{});
        const double t_ms = ms_since(t0);
        times.push(t_ms);
        samples_ms.push_back(t_ms);
        loglik = fit.loglik;
        status = to_string(fit.status);
    }
    const double max_ms = *std::max_element(samples_ms.begin(), samples_ms.end());
    const double median_ms = percentile_nearest_rank(samples_ms, 50.0);

    Json params = Json::object();
    params.set("dim", a.dim).set("n_obs", a.n_obs).set("nu", a.nu).set("repeats", a.repeats);
    Json seeds = Json::object();
    seeds.set("seed", a.seed);
    Json timings = Json::object();
    timings.set("total", max_ms * a.repeats);
    Json doc = Json::object();
    doc.set("times_ms", std::move(times))
        .set("median_ms", median_ms)
        .set("max_ms", max_ms)
        .set("loglik", loglik)
        .set("status", status)
        .set("manifest",
             manifest_json("bench", std::move(params), std::move(seeds), std::move(timings)));
    emit(a.out, doc);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact maximum-likelihood correlation estimation for Gaussian and Student t "
                 "copulas"};
    app.require_subcommand(1);

    FitArgs fit;
    CLI::App* cmd_fit = app.add_subcommand("fit", "Fit a copula correlation matrix to CSV data");
    cmd_fit->add_option("--input", fit.input, "CSV file of observations")->required();
    cmd_fit->add_option("--format", fit.format, "Input format")
        ->check(CLI::IsMember({"uniform", "ranks"}))
        ->capture_default_str();
    cmd_fit->add_option("--family", fit.family, "Copula family")
        ->check(CLI::IsMember({"gaussian", "t"}))
        ->capture_default_str();
    auto* nu_opt = cmd_fit->add_option("--nu", fit.nu, "Degrees of freedom (t family)");
    cmd_fit->add_option("--method", fit.method, "Estimator")
        ->check(CLI::IsMember({"ig", "approx", "naive", "full-t"}))
        ->capture_default_str();
    cmd_fit->add_option("--nu-lo", fit.nu_lo, "Lower nu bracket for full-t")
        ->capture_default_str();
    cmd_fit->add_option("--nu-hi", fit.nu_hi, "Upper nu bracket for full-t")
        ->capture_default_str();
    cmd_fit->add_option("--lambda0", fit.cfg.lambda0, "Initial step size (0 = 1/n)")
        ->capture_default_str();
    cmd_fit->add_option("--k1", fit.cfg.k1, "Step shrink factor")->capture_default_str();
    cmd_fit->add_option("--k2", fit.cfg.k2, "Step growth factor")->capture_default_str();
    cmd_fit->add_option("--max-iters", fit.cfg.max_iters, "Iteration cap")->capture_default_str();
    cmd_fit->add_option("--tol", fit.cfg.tol_param, "Parameter-change stopping tolerance")
        ->capture_default_str();
    cmd_fit->add_option("--tol-loglik", fit.cfg.tol_loglik, "Log-likelihood stopping tolerance")
        ->capture_default_str();
    cmd_fit->add_option("--seed", fit.seed, "Recorded in the manifest")->capture_default_str();
    cmd_fit->add_option("--out", fit.out, "Output JSON path (default stdout)");
    cmd_fit->add_flag("--trace", fit.trace, "Include the accepted-step trace in the output");

    SampleArgs smp;
    CLI::App* cmd_sample = app.add_subcommand("sample", "Draw a pseudo-sample from a copula");
    cmd_sample->add_option("--dim", smp.dim, "Dimension for a random correlation matrix");
    cmd_sample->add_option("--corr", smp.corr_path, "Correlation matrix CSV to sample from");
    cmd_sample->add_option("--family", smp.family, "Copula family")
        ->check(CLI::IsMember({"gaussian", "t"}))
        ->capture_default_str();
    auto* smp_nu = cmd_sample->add_option("--nu", smp.nu, "Degrees of freedom (t family)");
    cmd_sample->add_option("--n", smp.n, "Number of observations")->capture_default_str();
    cmd_sample->add_option("--seed", smp.seed, "RNG seed")->capture_default_str();
    cmd_sample->add_option("--out", smp.out, "Output CSV path")->required();

    GenCorrArgs gc;
    CLI::App* cmd_gen = app.add_subcommand("gen-corr", "Generate a random correlation matrix");
    cmd_gen->add_option("--dim", gc.dim, "Dimension")->required()->check(CLI::Range(2, 10000));
    cmd_gen->add_option("--seed", gc.seed, "RNG seed")->capture_default_str();
    cmd_gen->add_option("--out", gc.out, "Output CSV path")->required();

    ExperimentArgs exp;
    exp.cfg.jobs = jobs_default();
    CLI::App* cmd_exp = app.add_subcommand(
        "experiment", "Sweep random cases over a (dim, nu) grid and compare estimators");
    cmd_exp->add_option("--dims", exp.cfg.dims, "Dimensions")
        ->delimiter(',')
        ->capture_default_str();
    cmd_exp->add_option("--nus", exp.cfg.nus, "Degrees-of-freedom grid")
        ->delimiter(',')
        ->capture_default_str();
    cmd_exp->add_option("--cases-per-cell", exp.cfg.cases_per_cell, "Cases per (dim, nu) cell")
        ->capture_default_str();
    cmd_exp->add_option("--n-obs", exp.cfg.n_obs, "Observations per case")->capture_default_str();
    cmd_exp->add_option("--seed", exp.cfg.seed, "Sweep seed")->capture_default_str();
    cmd_exp->add_option("--jobs", exp.cfg.jobs, "Worker threads (env ELLCOP_JOBS)")
        ->capture_default_str();
    cmd_exp->add_option("--out", exp.out, "Records CSV path")->required();
    cmd_exp->add_option("--summary", exp.summary, "Summary JSON path")->required();

    BenchArgs bench;
    CLI::App* cmd_bench = app.add_subcommand("bench", "Time repeated fits of one synthetic case");
    cmd_bench->add_option("--dim", bench.dim, "Dimension")->capture_default_str();
    cmd_bench->add_option("--n-obs", bench.n_obs, "Observations")->capture_default_str();
    cmd_bench->add_option("--nu", bench.nu, "Degrees of freedom")->capture_default_str();
    cmd_bench->add_option("--repeats", bench.repeats, "Fit repetitions")->capture_default_str();
    cmd_bench->add_option("--seed", bench.seed, "Case seed")->capture_default_str();
    cmd_bench->add_option("--out", bench.out, "Output JSON path (default stdout)");

    CLI11_PARSE(app, argc, argv);
    fit.nu_set = nu_opt->count() > 0;
    smp.nu_set = smp_nu->count() > 0;

    try {
        if (cmd_fit->parsed()) return run_fit(fit);
        if (cmd_sample->parsed()) return run_sample(smp);
        if (cmd_gen->parsed()) return run_gen_corr(gc);
        if (cmd_exp->parsed()) return run_experiment_cmd(exp);
        if (cmd_bench->parsed()) return run_bench(bench);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
    return 1;
}
