#include "rmtnorm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "rmtnorm/errors.hpp"
#include "rmtnorm/factorization.hpp"

namespace rmtnorm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index writes its own slot,
// so results do not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(resolve_threads(threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

bool divides_unit(double step) {
    const double cells = 1.0 / step;
    return std::abs(cells - std::round(cells)) <= 1e-9 * cells;
}

void require_step(const char* name, double step) {
    if (!(step > 0.0 && step <= 0.1) || !divides_unit(step)) {
        throw ParameterError(name, "must lie in (0, 0.1] and divide 1 into a whole number of cells (got " +
                                       format_double(step) + ")");
    }
}

void require_positive_list(const char* name, const std::vector<double>& values) {
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ParameterError(name, "values must be finite and positive (got " + format_double(v) + ")");
        }
    }
}

std::size_t nearest_index(const std::vector<double>& grid, double x) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (std::abs(grid[i] - x) < std::abs(grid[best] - x)) best = i;
    }
    return best;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::CdfScaling: return "cdf-scaling";
    case ExperimentKind::CdfConvergence: return "cdf-convergence";
    case ExperimentKind::Coupling: return "coupling";
    }
    return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
    if (text == "cdf-scaling") return ExperimentKind::CdfScaling;
    if (text == "cdf-convergence") return ExperimentKind::CdfConvergence;
    if (text == "coupling") return ExperimentKind::Coupling;
    throw ParameterError("kind", "must be one of cdf-scaling, cdf-convergence, coupling (got " + text + ")");
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    switch (kind) {
    case ExperimentKind::CdfScaling:
        cfg.trials = 10;
        cfg.n_values = {100};
        cfg.j0_values = {0.1, 1.0, 10.0};
        cfg.ratio_values = {0.1, 0.3, 10.0};
        break;
    case ExperimentKind::CdfConvergence:
        cfg.trials = 10;
        cfg.n_values = {10, 25, 100, 500};
        cfg.j0_values = {1.0};
        cfg.j1_values = {0.3};
        break;
    case ExperimentKind::Coupling:
        cfg.trials = 20;
        cfg.n_values = {10, 50, 100, 500};
        cfg.j0_values = {1.0};
        cfg.j1_values = {0.1, 0.3, 10.0};
        break;
    }
    return cfg;
}

void ExperimentConfig::validate() const {
    if (trials < 1) {
        throw ParameterError("trials", "must be >= 1 (got " + std::to_string(trials) + ")");
    }
    if (n_values.empty()) throw ParameterError("n", "at least one value is required");
    for (int n : n_values) {
        if (n < 3) throw ParameterError("n", "must be >= 3 (got " + std::to_string(n) + ")");
    }
    if (j0_values.empty()) throw ParameterError("j0", "at least one value is required");
    require_positive_list("j0", j0_values);
    if (j1_values.empty() == ratio_values.empty()) {
        throw ParameterError("j1", "exactly one of j1 and ratio must be given");
    }
    require_positive_list("j1", j1_values);
    require_positive_list("ratio", ratio_values);
    require_step("grid_step", grid_step);
    require_step("theory_step", theory_step);
    if (threads < 0) {
        throw ParameterError("threads", "must be >= 0 (got " + std::to_string(threads) + ")");
    }
    const auto& t = tolerances;
    for (double v : {t.cdf_scaling, t.cdf_convergence, t.coupling_relative, t.plateau_level, t.plateau_onset}) {
        if (!(v > 0.0)) throw ParameterError("tolerances", "must be positive");
    }
    if (!(t.alpha_lo >= 0.0 && t.alpha_lo < t.alpha_hi && t.alpha_hi <= 1.0)) {
        throw ParameterError("tolerances", "alpha window must satisfy 0 <= alpha_lo < alpha_hi <= 1");
    }
}

std::vector<ParameterSet> parameter_sets(const ExperimentConfig& cfg) {
    std::vector<ParameterSet> sets;
    const bool by_ratio = !cfg.ratio_values.empty();
    const auto& outer = by_ratio ? cfg.ratio_values : cfg.j1_values;
    for (double v : outer) {
        for (double j0 : cfg.j0_values) {
            for (int n : cfg.n_values) {
                ParameterSet s;
                s.index = sets.size();
                s.params = CouplingParams{j0, by_ratio ? v * j0 : v, n};
                s.ratio = by_ratio ? v : 0.0;
                s.label = by_ratio ? "ratio_" + format_double(v) + "_j0_" + format_double(j0) + "_n_" + std::to_string(n)
                                   : "j0_" + format_double(j0) + "_j1_" + format_double(v) + "_n_" + std::to_string(n);
                sets.push_back(std::move(s));
            }
        }
    }
    return sets;
}

std::vector<double> unit_grid(double step) {
    require_step("grid_step", step);
    const auto cells = static_cast<int>(std::lround(1.0 / step));
    std::vector<double> grid(static_cast<std::size_t>(cells) + 1);
    for (int j = 0; j <= cells; ++j) {
        grid[static_cast<std::size_t>(j)] = static_cast<double>(j) / cells;
    }
    return grid;
}

EcdfEstimate ecdf(std::span<const double> samples, std::span<const double> grid) {
    if (samples.empty()) {
        throw ParameterError("samples", "at least one sample is required");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    EcdfEstimate e;
    e.grid.assign(grid.begin(), grid.end());
    e.sample_count = sorted.size();
    e.values.reserve(grid.size());
    const auto total = static_cast<double>(sorted.size());
    for (double x : grid) {
        const auto it = x >= 1.0 ? std::upper_bound(sorted.begin(), sorted.end(), x)
                                 : std::lower_bound(sorted.begin(), sorted.end(), x);
        e.values.push_back(static_cast<double>(it - sorted.begin()) / total);
    }
    return e;
}

double sup_deviation(const EcdfEstimate& e, const std::function<double(double)>& theory) {
    double worst = 0.0;
    for (std::size_t j = 0; j < e.grid.size(); ++j) {
        worst = std::max(worst, std::abs(e.values[j] - theory(e.grid[j])));
    }
    return worst;
}

double sup_difference(const EcdfEstimate& a, const EcdfEstimate& b) {
    if (a.grid != b.grid) {
        throw ParameterError("grid", "ECDFs must share the same grid");
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < a.values.size(); ++j) {
        worst = std::max(worst, std::abs(a.values[j] - b.values[j]));
    }
    return worst;
}

CdfSetResult run_cdf_set(const ExperimentConfig& cfg, const ParameterSet& set) {
    const auto start = Clock::now();
    const CouplingParams& cp = set.params;
    const auto trials = static_cast<std::size_t>(cfg.trials);
    std::vector<NormalizedSpectrum> spectra(trials);
    parallel_for(trials, cfg.threads, [&](std::size_t t) {
        spectra[t] = sample_normalized_spectrum(cp, cfg.master_seed, set.index, t);
    });

    const auto grid = unit_grid(cfg.grid_step);
    CdfSetResult out;
    std::vector<double> pooled;
    pooled.reserve(trials * static_cast<std::size_t>(cp.n));
    for (const auto& s : spectra) {
        pooled.insert(pooled.end(), s.values.begin(), s.values.end());
        out.per_trial.push_back(ecdf(s.values, grid));
    }
    out.pooled = ecdf(pooled, grid);

    const TheoryModel tm = TheoryModel::from(cp);
    out.sup_deviation_finite = sup_deviation(out.pooled, [&](double x) { return cdf_finite(x, tm); });
    out.sup_deviation_asymptotic =
        sup_deviation(out.pooled, [&](double x) { return cdf_asymptotic(x, cp.j0, cp.j1); });

    out.summary.set = set;
    if (cfg.kind == ExperimentKind::CdfConvergence) {
        out.summary.reference = "cdf_asymptotic";
        out.summary.sup_deviation = out.sup_deviation_asymptotic;
        out.summary.tolerance = cfg.tolerances.cdf_convergence;
    } else {
        out.summary.reference = "cdf_finite";
        out.summary.sup_deviation = out.sup_deviation_finite;
        out.summary.tolerance = cfg.tolerances.cdf_scaling;
    }
    out.summary.passed = out.summary.sup_deviation <= out.summary.tolerance;
    out.summary.wall_time_s = seconds_since(start);
    return out;
}

ErrorCurve coupling_error_curve(const CouplingParams& cp, std::span<const double> alphas, std::uint64_t master_seed,
                                std::size_t set_index, int trials, int threads) {
    if (trials < 1) {
        throw ParameterError("trials", "must be >= 1 (got " + std::to_string(trials) + ")");
    }
    const RawParams rp = params_from_couplings(cp);
    const auto count = static_cast<std::size_t>(trials);

    // errors[t][j]: normalized coupling error of trial t at alphas[j]
    std::vector<std::vector<double>> errors(count);
    parallel_for(count, threads, [&](std::size_t t) {
        RngStream stream(master_seed, set_index, t);
        const Spectrum s = spectrum(sample_matrix(rp, stream));
        errors[t].reserve(alphas.size());
        for (double a : alphas) {
            errors[t].push_back(coupling_error_threshold(s, a, cp).normalized_error);
        }
    });

    ErrorCurve curve;
    curve.alphas.assign(alphas.begin(), alphas.end());
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        double sum = 0.0;
        for (std::size_t t = 0; t < count; ++t) sum += errors[t][j];
        const double mean = sum / static_cast<double>(count);
        double sq = 0.0;
        for (std::size_t t = 0; t < count; ++t) sq += (errors[t][j] - mean) * (errors[t][j] - mean);
        const double variance = count > 1 ? sq / static_cast<double>(count - 1) : 0.0;
        curve.mean.push_back(mean);
        curve.variance.push_back(variance);
        curve.stddev.push_back(std::sqrt(variance));
    }
    return curve;
}

CouplingSetResult run_coupling_set(const ExperimentConfig& cfg, const ParameterSet& set) {
    const auto start = Clock::now();
    const CouplingParams& cp = set.params;
    const auto alphas = unit_grid(cfg.grid_step);

    CouplingSetResult out;
    out.curve = coupling_error_curve(cp, alphas, cfg.master_seed, set.index, cfg.trials, cfg.threads);
    const TheoryModel tm = TheoryModel::from(cp);
    for (double a : alphas) {
        out.theory_finite.push_back(coupling_error_theory_finite(a, tm));
        out.theory_asymptotic.push_back(coupling_error_theory_asymptotic(a, cp.j0, cp.j1));
    }

    const Tolerances& tol = cfg.tolerances;
    constexpr double kEdge = 1e-12;
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        if (alphas[j] < tol.alpha_lo - kEdge || alphas[j] > tol.alpha_hi + kEdge) continue;
        const double th = out.theory_finite[j];
        out.max_relative_deviation = std::max(out.max_relative_deviation, std::abs(out.curve.mean[j] - th) / th);
    }

    const double at_hi = out.curve.mean[nearest_index(alphas, tol.alpha_hi)];
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        if (out.curve.mean[j] >= 0.99 * at_hi) {
            out.plateau_onset = alphas[j];
            break;
        }
    }

    out.summary.set = set;
    out.summary.reference = "coupling_error_theory_finite";
    out.summary.sup_deviation = out.max_relative_deviation;
    out.summary.tolerance = tol.coupling_relative;
    bool passed = out.max_relative_deviation <= tol.coupling_relative;
    if (tm.regime == Regime::BulkSeparated) {
        const double level = 5.0 * (cp.n - 2.0) / cp.n;
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            if (alphas[j] <= tm.r || alphas[j] > tol.alpha_hi + kEdge) continue;
            out.plateau_level_deviation =
                std::max(out.plateau_level_deviation, std::abs(out.curve.mean[j] - level) / level);
        }
        out.onset_passed = std::abs(out.plateau_onset - tm.r) <= tol.plateau_onset;
        out.level_passed = out.plateau_level_deviation <= tol.plateau_level;
        passed = passed && out.onset_passed && out.level_passed;
    }
    out.summary.passed = passed;
    out.summary.wall_time_s = seconds_since(start);
    return out;
}

ExperimentRun run_cdf_scaling(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = Clock::now();
    ExperimentRun run;
    run.config = cfg;
    run.config.kind = ExperimentKind::CdfScaling;
    for (const auto& set : parameter_sets(run.config)) {
        run.cdf_sets.push_back(run_cdf_set(run.config, set));
    }
    // Sets sharing (ratio, N) should agree regardless of J0.
    const auto& sets = run.cdf_sets;
    for (std::size_t a = 0; a < sets.size(); ++a) {
        for (std::size_t b = a + 1; b < sets.size(); ++b) {
            const auto& pa = sets[a].summary.set;
            const auto& pb = sets[b].summary.set;
            if (pa.ratio == 0.0 || pa.ratio != pb.ratio || pa.params.n != pb.params.n) continue;
            PairwiseDifference d;
            d.ratio = pa.ratio;
            d.n = pa.params.n;
            d.j0_a = pa.params.j0;
            d.j0_b = pb.params.j0;
            d.sup_difference = sup_difference(sets[a].pooled, sets[b].pooled);
            d.passed = d.sup_difference <= cfg.tolerances.cdf_scaling;
            run.pairwise.push_back(d);
        }
    }
    run.passed = std::all_of(sets.begin(), sets.end(), [](const auto& s) { return s.summary.passed; }) &&
                 std::all_of(run.pairwise.begin(), run.pairwise.end(), [](const auto& d) { return d.passed; });
    run.wall_time_s = seconds_since(start);
    return run;
}

ExperimentRun run_cdf_convergence(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = Clock::now();
    ExperimentRun run;
    run.config = cfg;
    run.config.kind = ExperimentKind::CdfConvergence;
    const int n_max = *std::max_element(cfg.n_values.begin(), cfg.n_values.end());
    const int n_min = *std::min_element(cfg.n_values.begin(), cfg.n_values.end());
    for (const auto& set : parameter_sets(run.config)) {
        auto result = run_cdf_set(run.config, set);
        result.summary.gated = set.params.n == n_max;
        run.cdf_sets.push_back(std::move(result));
    }
    run.passed = true;
    for (const auto& big : run.cdf_sets) {
        if (!big.summary.gated) continue;
        run.passed = run.passed && big.summary.passed;
        for (const auto& small : run.cdf_sets) {
            const auto& ps = small.summary.set.params;
            const auto& pb = big.summary.set.params;
            if (ps.n != n_min || n_min == n_max || ps.j0 != pb.j0 || ps.j1 != pb.j1) continue;
            run.converging = run.converging && big.summary.sup_deviation < small.summary.sup_deviation;
        }
    }
    run.passed = run.passed && run.converging;
    run.wall_time_s = seconds_since(start);
    return run;
}

ExperimentRun run_coupling_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = Clock::now();
    ExperimentRun run;
    run.config = cfg;
    run.config.kind = ExperimentKind::Coupling;
    const int n_max = *std::max_element(cfg.n_values.begin(), cfg.n_values.end());
    run.passed = true;
    for (const auto& set : parameter_sets(run.config)) {
        auto result = run_coupling_set(run.config, set);
        result.summary.gated = set.params.n == n_max;
        if (result.summary.gated) run.passed = run.passed && result.summary.passed;
        run.coupling_sets.push_back(std::move(result));
    }
    run.wall_time_s = seconds_since(start);
    return run;
}

ExperimentRun run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
    case ExperimentKind::CdfScaling: return run_cdf_scaling(cfg);
    case ExperimentKind::CdfConvergence: return run_cdf_convergence(cfg);
    case ExperimentKind::Coupling: return run_coupling_experiment(cfg);
    }
    throw ParameterError("kind", "unknown experiment kind");
}

}  // namespace rmtnorm
