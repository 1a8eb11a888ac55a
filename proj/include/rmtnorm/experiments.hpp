#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rmtnorm/ensemble.hpp"
#include "rmtnorm/theory.hpp"

namespace rmtnorm {

enum class ExperimentKind { CdfScaling, CdfConvergence, Coupling };

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& text);

/// Pass thresholds applied by the experiment runners.
struct Tolerances {
    double cdf_scaling = 0.06;       // sup |ECDF - cdf_finite| and pairwise sup across J0
    double cdf_convergence = 0.03;   // sup |ECDF - cdf_asymptotic| at the largest N
    double coupling_relative = 0.05; // relative error of the mean curve on [alpha_lo, alpha_hi]
    double plateau_level = 0.02;     // relative error of the plateau against 5 (N - 2) / N
    double plateau_onset = 0.1;      // |detected onset - r|
    double alpha_lo = 0.05;
    double alpha_hi = 0.95;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::CdfScaling;
    std::uint64_t master_seed = 42;
    int trials = 10;
    std::vector<int> n_values;
    std::vector<double> j0_values;
    /// J1 sweep used when ratio_values is empty.
    std::vector<double> j1_values;
    /// J1 = ratio * J0 for every J0.
    std::vector<double> ratio_values;
    double grid_step = 0.01;
    double theory_step = 0.001;
    std::string output_path;
    /// 0 selects std::thread::hardware_concurrency().
    int threads = 0;
    bool record_timing = false;
    Tolerances tolerances;

    static ExperimentConfig defaults(ExperimentKind kind);

    /// Throws ParameterError naming the offending field.
    void validate() const;
};

/// One (J0, J1, N) point of a sweep. `index` addresses the RNG streams of its trials.
struct ParameterSet {
    std::size_t index = 0;
    CouplingParams params;
    /// J1 / J0 when the sweep was specified by ratio, 0 otherwise.
    double ratio = 0.0;
    std::string label;
};

std::vector<ParameterSet> parameter_sets(const ExperimentConfig& cfg);

/// Points j / cells for j = 0..cells, cells = round(1 / step). Throws unless step divides 1.
std::vector<double> unit_grid(double step);

struct EcdfEstimate {
    std::vector<double> grid;
    std::vector<double> values;
    std::size_t sample_count = 0;
};

/// values[j] = #{samples < grid[j]} / sample_count. A grid point at or beyond 1 closes the
/// distribution and counts samples <= grid[j], so an ECDF on [0, 1] ends at exactly 1.
EcdfEstimate ecdf(std::span<const double> samples, std::span<const double> grid);

/// max_j |e.values[j] - theory(e.grid[j])|.
double sup_deviation(const EcdfEstimate& e, const std::function<double(double)>& theory);

/// sup over the common grid of |a - b|.
double sup_difference(const EcdfEstimate& a, const EcdfEstimate& b);

struct ErrorCurve {
    std::vector<double> alphas;
    std::vector<double> mean;
    /// Sample standard deviation across trials.
    std::vector<double> stddev;
    std::vector<double> variance;
};

struct SetSummary {
    ParameterSet set;
    std::string reference;
    double sup_deviation = 0.0;
    double tolerance = 0.0;
    /// Whether this set takes part in the run's pass/fail decision.
    bool gated = true;
    bool passed = true;
    double wall_time_s = 0.0;
};

struct CdfSetResult {
    SetSummary summary;
    EcdfEstimate pooled;
    std::vector<EcdfEstimate> per_trial;
    double sup_deviation_finite = 0.0;
    double sup_deviation_asymptotic = 0.0;
};

struct PairwiseDifference {
    double ratio = 0.0;
    int n = 0;
    double j0_a = 0.0;
    double j0_b = 0.0;
    double sup_difference = 0.0;
    bool passed = true;
};

struct CouplingSetResult {
    SetSummary summary;
    ErrorCurve curve;
    std::vector<double> theory_finite;
    std::vector<double> theory_asymptotic;
    /// Largest relative deviation of the mean curve from theory_finite on [alpha_lo, alpha_hi].
    double max_relative_deviation = 0.0;
    /// First alpha where the mean reaches 99% of its value at alpha_hi.
    double plateau_onset = 0.0;
    /// Largest relative deviation from 5 (N - 2) / N over grid points in (r, alpha_hi].
    /// Only meaningful when J1 <= J0.
    double plateau_level_deviation = 0.0;
    bool onset_passed = true;
    bool level_passed = true;
};

struct ExperimentRun {
    ExperimentConfig config;
    std::vector<CdfSetResult> cdf_sets;
    std::vector<PairwiseDifference> pairwise;
    std::vector<CouplingSetResult> coupling_sets;
    /// Convergence runs: deviation at the largest N is strictly below that at the smallest N.
    bool converging = true;
    bool passed = true;
    double wall_time_s = 0.0;
};

/// Pooled and per-trial ECDFs of the normalized spectrum for one parameter set on the
/// cfg.grid_step grid. Convergence runs are judged against cdf_asymptotic, others against cdf_finite.
CdfSetResult run_cdf_set(const ExperimentConfig& cfg, const ParameterSet& set);

/// Mean and spread across trials of the normalized coupling error at each alpha. Trial t draws
/// from the stream (master_seed, set_index, t).
ErrorCurve coupling_error_curve(const CouplingParams& cp, std::span<const double> alphas, std::uint64_t master_seed,
                                std::size_t set_index, int trials, int threads);

/// coupling_error_curve on the cfg.grid_step alpha grid, with theory overlays and plateau checks.
CouplingSetResult run_coupling_set(const ExperimentConfig& cfg, const ParameterSet& set);

ExperimentRun run_cdf_scaling(const ExperimentConfig& cfg);
ExperimentRun run_cdf_convergence(const ExperimentConfig& cfg);
ExperimentRun run_coupling_experiment(const ExperimentConfig& cfg);

/// Dispatches on cfg.kind.
ExperimentRun run_experiment(const ExperimentConfig& cfg);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Serialized artifacts of a run, keyed by file name: one CSV per parameter set (plus per-trial
/// and theory-curve CSVs for CDF runs) and a `<kind>_summary.json`.
std::vector<std::pair<std::string, std::string>> render_artifacts(const ExperimentRun& run);

/// Writes render_artifacts(run) into `directory`, creating it if needed.
void write_artifacts(const ExperimentRun& run, const std::string& directory);

}  // namespace rmtnorm
