#include <charconv>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rmtnorm/experiments.hpp"

namespace rmtnorm {

namespace {

using nlohmann::ordered_json;

std::string csv_row(std::initializer_list<double> values) {
    std::string line;
    bool first = true;
    for (double v : values) {
        if (!first) line += ',';
        line += format_double(v);
        first = false;
    }
    line += '\n';
    return line;
}

ordered_json config_echo(const ExperimentConfig& cfg) {
    ordered_json j;
    j["kind"] = to_string(cfg.kind);
    j["master_seed"] = cfg.master_seed;
    j["trials"] = cfg.trials;
    j["n_values"] = cfg.n_values;
    j["j0_values"] = cfg.j0_values;
    if (cfg.ratio_values.empty()) {
        j["j1_values"] = cfg.j1_values;
    } else {
        j["ratio_values"] = cfg.ratio_values;
    }
    j["grid_step"] = cfg.grid_step;
    j["theory_step"] = cfg.theory_step;
    const auto& t = cfg.tolerances;
    j["tolerances"] = {{"cdf_scaling", t.cdf_scaling},
                       {"cdf_convergence", t.cdf_convergence},
                       {"coupling_relative", t.coupling_relative},
                       {"plateau_level", t.plateau_level},
                       {"plateau_onset", t.plateau_onset},
                       {"alpha_lo", t.alpha_lo},
                       {"alpha_hi", t.alpha_hi}};
    return j;
}

ordered_json set_echo(const SetSummary& s, bool record_timing) {
    const auto& p = s.set.params;
    const TheoryModel tm = TheoryModel::from(p);
    ordered_json j;
    j["label"] = s.set.label;
    j["set_index"] = s.set.index;
    j["j0"] = p.j0;
    j["j1"] = p.j1;
    j["n"] = p.n;
    if (s.set.ratio > 0.0) j["ratio"] = s.set.ratio;
    j["regime"] = to_string(tm.regime);
    j["r"] = tm.r;
    j["reference"] = s.reference;
    j["sup_deviation"] = s.sup_deviation;
    j["tolerance"] = s.tolerance;
    j["gated"] = s.gated;
    j["passed"] = s.passed;
    if (record_timing) j["wall_time_s"] = s.wall_time_s;
    return j;
}

std::string cdf_csv(const CdfSetResult& r) {
    const auto& p = r.summary.set.params;
    const TheoryModel tm = TheoryModel::from(p);
    std::string out = "x,empirical,theory_finite,theory_asymptotic\n";
    for (std::size_t j = 0; j < r.pooled.grid.size(); ++j) {
        const double x = r.pooled.grid[j];
        out += csv_row({x, r.pooled.values[j], cdf_finite(x, tm), cdf_asymptotic(x, p.j0, p.j1)});
    }
    return out;
}

std::string trials_csv(const CdfSetResult& r) {
    std::string out = "x";
    for (std::size_t t = 0; t < r.per_trial.size(); ++t) out += ",trial_" + std::to_string(t);
    out += '\n';
    for (std::size_t j = 0; j < r.pooled.grid.size(); ++j) {
        out += format_double(r.pooled.grid[j]);
        for (const auto& e : r.per_trial) {
            out += ',';
            out += format_double(e.values[j]);
        }
        out += '\n';
    }
    return out;
}

std::string theory_csv(const CouplingParams& p, double step) {
    const TheoryModel tm = TheoryModel::from(p);
    std::string out = "x,theory_finite,theory_asymptotic\n";
    for (double x : unit_grid(step)) {
        out += csv_row({x, cdf_finite(x, tm), cdf_asymptotic(x, p.j0, p.j1)});
    }
    return out;
}

std::string coupling_csv(const CouplingSetResult& r) {
    std::string out = "alpha,empirical,theory_finite,theory_asymptotic,std\n";
    for (std::size_t j = 0; j < r.curve.alphas.size(); ++j) {
        out += csv_row({r.curve.alphas[j], r.curve.mean[j], r.theory_finite[j], r.theory_asymptotic[j],
                        r.curve.stddev[j]});
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc()) throw std::runtime_error("failed to format double");
    return std::string(buf, res.ptr);
}

std::vector<std::pair<std::string, std::string>> render_artifacts(const ExperimentRun& run) {
    const ExperimentConfig& cfg = run.config;
    const std::string prefix = to_string(cfg.kind);
    std::vector<std::pair<std::string, std::string>> files;

    ordered_json summary;
    summary["config"] = config_echo(cfg);
    summary["sets"] = ordered_json::array();

    for (const auto& r : run.cdf_sets) {
        const std::string stem = prefix + "_" + r.summary.set.label;
        files.emplace_back(stem + ".csv", cdf_csv(r));
        files.emplace_back(stem + "_trials.csv", trials_csv(r));
        files.emplace_back(stem + "_theory.csv", theory_csv(r.summary.set.params, cfg.theory_step));
        auto j = set_echo(r.summary, cfg.record_timing);
        j["sup_deviation_finite"] = r.sup_deviation_finite;
        j["sup_deviation_asymptotic"] = r.sup_deviation_asymptotic;
        j["sample_count"] = r.pooled.sample_count;
        j["csv"] = stem + ".csv";
        summary["sets"].push_back(std::move(j));
    }
    for (const auto& r : run.coupling_sets) {
        const std::string stem = prefix + "_" + r.summary.set.label;
        files.emplace_back(stem + ".csv", coupling_csv(r));
        auto j = set_echo(r.summary, cfg.record_timing);
        j["plateau_onset"] = r.plateau_onset;
        j["onset_passed"] = r.onset_passed;
        j["plateau_level_deviation"] = r.plateau_level_deviation;
        j["level_passed"] = r.level_passed;
        j["error_band"] = "std";
        j["variance"] = r.curve.variance;
        j["csv"] = stem + ".csv";
        summary["sets"].push_back(std::move(j));
    }
    if (!run.pairwise.empty()) {
        summary["pairwise"] = ordered_json::array();
        for (const auto& d : run.pairwise) {
            summary["pairwise"].push_back({{"ratio", d.ratio},
                                           {"n", d.n},
                                           {"j0_a", d.j0_a},
                                           {"j0_b", d.j0_b},
                                           {"sup_difference", d.sup_difference},
                                           {"passed", d.passed}});
        }
    }
    if (cfg.kind == ExperimentKind::CdfConvergence) summary["converging"] = run.converging;
    summary["passed"] = run.passed;
    if (cfg.record_timing) summary["wall_time_s"] = run.wall_time_s;

    files.emplace_back(prefix + "_summary.json", summary.dump(2) + "\n");
    return files;
}

void write_artifacts(const ExperimentRun& run, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    for (const auto& [name, content] : render_artifacts(run)) {
        std::ofstream out(fs::path(directory) / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (fs::path(directory) / name).string());
        out << content;
    }
}

}  // namespace rmtnorm
