#include "rmtnorm/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rmtnorm/ensemble.hpp"
#include "rmtnorm/errors.hpp"
#include "rmtnorm/experiments.hpp"
#include "rmtnorm/factorization.hpp"
#include "rmtnorm/theory.hpp"
#include "rmtnorm/verify.hpp"

namespace rmtnorm::cli {

namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 42;

// Raised for flag combinations CLI11 cannot express; carries the flag to blame.
struct FlagError {
    std::string flag;
    std::string message;
};

std::string flag_for(const std::string& parameter) {
    std::string flag = parameter;
    std::replace(flag.begin(), flag.end(), '_', '-');
    return "--" + flag;
}

struct ModelFlags {
    int n = 0;
    double j0 = 1.0;
    double j1 = 0.0;
    double ratio = 0.0;
    CLI::Option* j1_opt = nullptr;
    CLI::Option* ratio_opt = nullptr;

    void attach(CLI::App* sub) {
        sub->add_option("--n", n, "Matrix dimension N (>= 3)")->required();
        sub->add_option("--j0", j0, "Mean coupling scale J0 (> 0)")->capture_default_str();
        j1_opt = sub->add_option("--j1", j1, "Disorder scale J1 (> 0)");
        ratio_opt = sub->add_option("--ratio", ratio, "Sets J1 = ratio * J0");
        j1_opt->excludes(ratio_opt);
    }

    CouplingParams resolve() const {
        if (j1_opt->count() == 0 && ratio_opt->count() == 0) {
            throw FlagError{"--j1", "one of --j1 or --ratio is required"};
        }
        if (ratio_opt->count() > 0 && !(ratio > 0.0)) {
            throw FlagError{"--ratio", "must be a finite positive number"};
        }
        CouplingParams cp{j0, ratio_opt->count() > 0 ? ratio * j0 : j1, n};
        cp.validate();
        return cp;
    }
};

struct SeedFlag {
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* sub) {
        sub->add_option("--seed", seed, "Master seed (overrides RMT_SEED; default 42)");
    }

    std::uint64_t resolve() const {
        if (seed) return *seed;
        if (const char* env = std::getenv("RMT_SEED"); env != nullptr && *env != '\0') {
            try {
                std::size_t used = 0;
                const unsigned long long v = std::stoull(env, &used, 10);
                if (used == std::char_traits<char>::length(env)) return v;
            } catch (const std::exception&) {
            }
            throw FlagError{"RMT_SEED", "must be an unsigned 64-bit integer (got '" + std::string(env) + "')"};
        }
        return kDefaultSeed;
    }
};

void emit(const std::string& content, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << content;
        return;
    }
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    std::ofstream file(target, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + path);
    file << content;
}

ordered_json params_json(const CouplingParams& cp) {
    const TheoryModel tm = TheoryModel::from(cp);
    return {{"n", cp.n}, {"j0", cp.j0}, {"j1", cp.j1}, {"regime", to_string(tm.regime)}, {"r", tm.r}};
}

std::vector<double> alpha_points(const std::optional<double>& alpha, double grid_step) {
    if (alpha) {
        if (!(*alpha >= 0.0 && *alpha <= 1.0)) throw FlagError{"--alpha", "must lie in [0, 1]"};
        return {*alpha};
    }
    return unit_grid(grid_step);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Min-max normalized eigenvalue statistics of finite-mean Gaussian symmetric matrices", "rmtnorm"};
    app.require_subcommand(1);

    std::string format = "csv";
    std::string out_path;
    int threads = 0;
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    };
    auto add_out = [&](CLI::App* sub, const char* what) { sub->add_option("--out", out_path, what); };
    auto add_threads = [&](CLI::App* sub) {
        sub->add_option("--threads", threads, "Worker threads (0 = available parallelism)")->check(CLI::NonNegativeNumber);
    };

    // sample
    ModelFlags sample_model;
    SeedFlag sample_seed;
    int sample_trials = 1;
    auto* sample = app.add_subcommand("sample", "Draw matrices and print raw and normalized spectra");
    sample_model.attach(sample);
    sample_seed.attach(sample);
    sample->add_option("--trials", sample_trials, "Number of draws")->capture_default_str();
    add_format(sample);
    add_out(sample, "Output file (default: stdout)");

    // theory-cdf
    ModelFlags cdf_model;
    double cdf_step = 0.001;
    auto* theory_cdf = app.add_subcommand("theory-cdf", "Evaluate the finite-N and asymptotic CDFs on a grid");
    cdf_model.attach(theory_cdf);
    theory_cdf->add_option("--grid-step", cdf_step, "Grid spacing on [0, 1]")->capture_default_str();
    add_format(theory_cdf);
    add_out(theory_cdf, "Output file (default: stdout)");

    // theory-error
    ModelFlags err_model;
    double err_step = 0.001;
    std::optional<double> err_alpha;
    auto* theory_error = app.add_subcommand("theory-error", "Evaluate the expected coupling error curves");
    err_model.attach(theory_error);
    theory_error->add_option("--grid-step", err_step, "Alpha grid spacing on [0, 1]")->capture_default_str();
    theory_error->add_option("--alpha", err_alpha, "Evaluate a single threshold instead of a grid");
    add_format(theory_error);
    add_out(theory_error, "Output file (default: stdout)");

    // factorize
    ModelFlags fact_model;
    SeedFlag fact_seed;
    std::optional<int> fact_rank;
    auto* factorize = app.add_subcommand("factorize", "Rank-k factorization residuals of one sampled matrix");
    fact_model.attach(factorize);
    fact_seed.attach(factorize);
    factorize->add_option("--rank", fact_rank, "Single rank k in [1, N] (default: every rank)");
    add_format(factorize);
    add_out(factorize, "Output file (default: stdout)");

    // coupling-error
    ModelFlags ce_model;
    SeedFlag ce_seed;
    int ce_trials = 20;
    double ce_step = 0.01;
    std::optional<double> ce_alpha;
    auto* coupling = app.add_subcommand("coupling-error", "Empirical coupling error by threshold alpha");
    ce_model.attach(coupling);
    ce_seed.attach(coupling);
    coupling->add_option("--trials", ce_trials, "Number of sampled matrices")->capture_default_str();
    coupling->add_option("--grid-step", ce_step, "Alpha grid spacing on [0, 1]")->capture_default_str();
    coupling->add_option("--alpha", ce_alpha, "Evaluate a single threshold instead of a grid");
    add_format(coupling);
    add_out(coupling, "Output file (default: stdout)");
    add_threads(coupling);

    // experiment
    std::string exp_kind;
    SeedFlag exp_seed;
    std::optional<int> exp_trials;
    std::vector<int> exp_n;
    std::vector<double> exp_j0;
    std::vector<double> exp_j1;
    std::vector<double> exp_ratio;
    std::optional<double> exp_step;
    bool exp_timing = false;
    auto* experiment = app.add_subcommand("experiment", "Run a seeded Monte Carlo experiment");
    experiment->add_option("--kind", exp_kind, "cdf-scaling | cdf-convergence | coupling")
        ->required()
        ->check(CLI::IsMember({"cdf-scaling", "cdf-convergence", "coupling"}));
    exp_seed.attach(experiment);
    experiment->add_option("--trials", exp_trials, "Trials per parameter set");
    experiment->add_option("--n", exp_n, "Comma-separated N values")->delimiter(',');
    experiment->add_option("--j0", exp_j0, "Comma-separated J0 values")->delimiter(',');
    auto* exp_j1_opt = experiment->add_option("--j1", exp_j1, "Comma-separated J1 values")->delimiter(',');
    auto* exp_ratio_opt = experiment->add_option("--ratio", exp_ratio, "Comma-separated J1/J0 ratios")->delimiter(',');
    exp_j1_opt->excludes(exp_ratio_opt);
    experiment->add_option("--grid-step", exp_step, "Comparison grid spacing on [0, 1]");
    experiment->add_flag("--record-timing", exp_timing, "Include wall times in the summary JSON");
    add_out(experiment, "Output directory (default: summary JSON on stdout)");
    add_threads(experiment);

    // verify
    SeedFlag verify_seed;
    bool verify_fast = false;
    auto* verify = app.add_subcommand("verify", "Run the analytic and Monte Carlo verification suite");
    verify_seed.attach(verify);
    verify->add_flag("--fast", verify_fast, "Analytic checks only");
    add_out(verify, "Directory for experiment artifacts and the report");
    add_threads(verify);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidationError;
    }

    try {
        if (*sample) {
            const CouplingParams cp = sample_model.resolve();
            const std::uint64_t seed = sample_seed.resolve();
            if (sample_trials < 1) throw FlagError{"--trials", "must be >= 1"};
            const RawParams rp = params_from_couplings(cp);
            std::string csv = "trial,index,eigenvalue,normalized\n";
            ordered_json j{{"params", params_json(cp)}, {"seed", seed}, {"trials", ordered_json::array()}};
            for (int t = 0; t < sample_trials; ++t) {
                RngStream stream(seed, 0, static_cast<std::uint64_t>(t));
                const Spectrum s = spectrum(sample_matrix(rp, stream));
                const NormalizedSpectrum ns = normalize(s);
                for (std::size_t i = 0; i < s.size(); ++i) {
                    csv += std::to_string(t) + "," + std::to_string(i) + "," + format_double(s.values[i]) + "," +
                           format_double(ns.values[i]) + "\n";
                }
                j["trials"].push_back({{"trial", t}, {"eigenvalues", s.values}, {"normalized", ns.values}});
            }
            emit(format == "json" ? j.dump(2) + "\n" : csv, out_path, out);
        } else if (*theory_cdf) {
            const CouplingParams cp = cdf_model.resolve();
            const auto grid = unit_grid(cdf_step);
            const TheoryModel tm = TheoryModel::from(cp);
            std::string csv = "x,theory_finite,theory_asymptotic\n";
            std::vector<double> fin;
            std::vector<double> asy;
            for (double x : grid) {
                fin.push_back(cdf_finite(x, tm));
                asy.push_back(cdf_asymptotic(x, cp.j0, cp.j1));
                csv += format_double(x) + "," + format_double(fin.back()) + "," + format_double(asy.back()) + "\n";
            }
            ordered_json j{{"params", params_json(cp)}, {"x", grid}, {"theory_finite", fin}, {"theory_asymptotic", asy}};
            emit(format == "json" ? j.dump(2) + "\n" : csv, out_path, out);
        } else if (*theory_error) {
            const CouplingParams cp = err_model.resolve();
            const auto alphas = alpha_points(err_alpha, err_step);
            const TheoryModel tm = TheoryModel::from(cp);
            std::string csv = "alpha,theory_finite,theory_asymptotic\n";
            std::vector<double> fin;
            std::vector<double> asy;
            for (double a : alphas) {
                fin.push_back(coupling_error_theory_finite(a, tm));
                asy.push_back(coupling_error_theory_asymptotic(a, cp.j0, cp.j1));
                csv += format_double(a) + "," + format_double(fin.back()) + "," + format_double(asy.back()) + "\n";
            }
            ordered_json j{{"params", params_json(cp)}, {"alpha", alphas}, {"theory_finite", fin}, {"theory_asymptotic", asy}};
            emit(format == "json" ? j.dump(2) + "\n" : csv, out_path, out);
        } else if (*factorize) {
            const CouplingParams cp = fact_model.resolve();
            const std::uint64_t seed = fact_seed.resolve();
            if (fact_rank && (*fact_rank < 1 || *fact_rank > cp.n)) {
                throw FlagError{"--rank", "must lie in [1, " + std::to_string(cp.n) + "]"};
            }
            RngStream stream(seed, 0, 0);
            const SymmetricMatrix q = sample_matrix(params_from_couplings(cp), stream);
            const Spectrum s = spectrum(q);
            const double lam_n = s.smallest();
            std::string csv = "rank,frobenius_residual,tail_sum,normalized_error\n";
            ordered_json rows = ordered_json::array();
            const int lo = fact_rank.value_or(1);
            const int hi = fact_rank.value_or(cp.n);
            for (int k = lo; k <= hi; ++k) {
                const double residual = frobenius_residual(q, lam_n, low_rank_factor(q, k, lam_n));
                const double tail = coupling_error_rank(s, k);
                const double normalized = tail / (cp.n * cp.j1 * cp.j1);
                csv += std::to_string(k) + "," + format_double(residual) + "," + format_double(tail) + "," +
                       format_double(normalized) + "\n";
                rows.push_back({{"rank", k}, {"frobenius_residual", residual}, {"tail_sum", tail}, {"normalized_error", normalized}});
            }
            ordered_json j{{"params", params_json(cp)}, {"seed", seed}, {"lambda_1", s.largest()}, {"lambda_n", lam_n}, {"ranks", rows}};
            emit(format == "json" ? j.dump(2) + "\n" : csv, out_path, out);
        } else if (*coupling) {
            const CouplingParams cp = ce_model.resolve();
            const std::uint64_t seed = ce_seed.resolve();
            const auto alphas = alpha_points(ce_alpha, ce_step);
            const ErrorCurve curve = coupling_error_curve(cp, alphas, seed, 0, ce_trials, threads);
            const TheoryModel tm = TheoryModel::from(cp);
            std::string csv = "alpha,empirical,theory_finite,theory_asymptotic,std\n";
            std::vector<double> fin;
            std::vector<double> asy;
            for (std::size_t i = 0; i < alphas.size(); ++i) {
                fin.push_back(coupling_error_theory_finite(alphas[i], tm));
                asy.push_back(coupling_error_theory_asymptotic(alphas[i], cp.j0, cp.j1));
                csv += format_double(alphas[i]) + "," + format_double(curve.mean[i]) + "," + format_double(fin.back()) +
                       "," + format_double(asy.back()) + "," + format_double(curve.stddev[i]) + "\n";
            }
            ordered_json j{{"params", params_json(cp)}, {"seed", seed},          {"trials", ce_trials},
                           {"alpha", alphas},           {"empirical", curve.mean}, {"std", curve.stddev},
                           {"variance", curve.variance}, {"theory_finite", fin},  {"theory_asymptotic", asy}};
            emit(format == "json" ? j.dump(2) + "\n" : csv, out_path, out);
        } else if (*experiment) {
            ExperimentConfig cfg = ExperimentConfig::defaults(parse_experiment_kind(exp_kind));
            cfg.master_seed = exp_seed.resolve();
            if (exp_trials) cfg.trials = *exp_trials;
            if (!exp_n.empty()) cfg.n_values = exp_n;
            if (!exp_j0.empty()) cfg.j0_values = exp_j0;
            if (!exp_j1.empty()) {
                cfg.j1_values = exp_j1;
                cfg.ratio_values.clear();
            }
            if (!exp_ratio.empty()) {
                cfg.ratio_values = exp_ratio;
                cfg.j1_values.clear();
            }
            if (exp_step) cfg.grid_step = *exp_step;
            cfg.threads = threads;
            cfg.record_timing = exp_timing;
            cfg.output_path = out_path;
            cfg.validate();
            const ExperimentRun run = run_experiment(cfg);
            if (out_path.empty()) {
                const auto files = render_artifacts(run);
                out << files.back().second;
            } else {
                write_artifacts(run, out_path);
            }
            err << to_string(cfg.kind) << ": " << (run.passed ? "within" : "OUTSIDE") << " tolerances, "
                << format_double(run.wall_time_s) << " s\n";
        } else if (*verify) {
            VerifyOptions options;
            options.seed = verify_seed.resolve();
            options.fast = verify_fast;
            options.threads = threads;
            if (!out_path.empty()) options.output_dir = out_path;
            const VerifyReport report = run_verify(options);
            out << render_report_table(report);
            for (const auto& c : report.checks) {
                err << c.name << ": " << format_double(c.wall_time_s) << " s\n";
            }
            if (const CheckResult* failed = report.first_failure()) {
                err << "error: verification check '" << failed->name << "' failed: " << failed->detail << "\n";
                return kVerifyFailed;
            }
        }
    } catch (const FlagError& e) {
        err << "error: " << e.flag << ": " << e.message << "\n";
        return kValidationError;
    } catch (const ParameterError& e) {
        err << "error: " << flag_for(e.parameter()) << ": " << e.message() << "\n";
        return kValidationError;
    } catch (const DegenerateSpectrumError& e) {
        err << "error: degenerate spectrum: " << e.what() << "\n";
        return kNumericalError;
    } catch (const NumericalError& e) {
        err << "error: numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumericalError;
    }
    return kOk;
}

}  // namespace rmtnorm::cli
