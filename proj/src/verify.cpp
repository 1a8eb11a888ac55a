#include "rmtnorm/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <nlohmann/json.hpp>

#include "rmtnorm/ensemble.hpp"
#include "rmtnorm/experiments.hpp"
#include "rmtnorm/factorization.hpp"
#include "rmtnorm/theory.hpp"

namespace rmtnorm {

namespace {

constexpr double kPi = std::numbers::pi;

// Stream namespaces for checks that sample, kept apart from experiment set indices.
constexpr std::uint64_t kFrobeniusStreams = 1'000'000;
constexpr std::uint64_t kTheoryStreams = 2'000'000;

struct Outcome {
    bool passed = true;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

double integrate_singular(const std::function<double(double)>& f, double a, double b) {
    if (!(b > a)) return 0.0;
    thread_local boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate(f, a, b, 1e-14);
}

Outcome check_frobenius_identity(std::uint64_t seed) {
    double worst_rel = 0.0;
    double worst_full = 0.0;
    bool ok = true;
    for (int n : {10, 50}) {
        const CouplingParams cp{1.0, 0.3, n};
        for (std::uint64_t s = 0; s < 5; ++s) {
            RngStream stream(seed, kFrobeniusStreams + static_cast<std::uint64_t>(n), s);
            const SymmetricMatrix q = sample_matrix(params_from_couplings(cp), stream);
            const Spectrum sp = spectrum(q);
            const double lam_n = sp.smallest();
            const double qnorm = q.frobenius_norm();
            for (int k : {1, n / 2, n - 1, n}) {
                const double residual = frobenius_residual(q, lam_n, low_rank_factor(q, k, lam_n));
                const double tail = coupling_error_rank(sp, k);
                if (tail > 0.0) {
                    const double rel = std::abs(residual - tail) / tail;
                    worst_rel = std::max(worst_rel, rel);
                    ok = ok && rel <= 1e-9;
                } else {
                    const double ratio = std::sqrt(residual) / qnorm;
                    worst_full = std::max(worst_full, ratio);
                    ok = ok && ratio <= 1e-8;
                }
            }
        }
    }
    return {ok, "max rel " + sci(worst_rel) + " (tol 1e-9), full-rank ||R||/||Q|| " + sci(worst_full) +
                    " (tol 1e-8)"};
}

Outcome check_theory_consistency(std::uint64_t seed) {
    RngStream stream(seed, kTheoryStreams, 0);
    double worst_cdf = 0.0;
    double worst_err = 0.0;
    bool ok = true;
    for (int i = 0; i < 50; ++i) {
        const int n = 3 + static_cast<int>(stream.uniform() * 998.0);
        const double ratio = 0.01 + 0.98 * stream.uniform();
        const TheoryModel tm = TheoryModel::from(CouplingParams{1.0, ratio, n});
        const double above = std::nextafter(tm.r, 2.0);
        const double cdf_gap = std::abs(cdf_finite(above, tm) - cdf_finite(tm.r, tm));
        const double err_gap =
            std::abs(coupling_error_theory_finite(above, tm) - coupling_error_theory_finite(tm.r, tm));
        worst_cdf = std::max(worst_cdf, cdf_gap);
        worst_err = std::max(worst_err, err_gap);
        ok = ok && cdf_gap <= 1e-12 && err_gap <= 1e-12;
        ok = ok && cdf_finite(1.0, tm) == 1.0;
        ok = ok && cdf_finite(1.0, TheoryModel::from(CouplingParams{1.0, 1.0 / ratio, n})) == 1.0;
    }
    const double g0 = g_function(0.0);
    const double g1_gap = std::abs(g_function(1.0) - 15.0 * kPi);
    ok = ok && g0 == 0.0 && g1_gap <= 1e-12;

    double worst_quad = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double r = 1e-3 + (1.0 - 1e-3) * stream.uniform();
        const double x = r * stream.uniform();
        const double numeric = integrate_singular(
            [r](double t) { return std::sqrt(std::max(0.0, r * r - (2.0 * t - r) * (2.0 * t - r))); }, 0.0, x);
        worst_quad = std::max(worst_quad, std::abs(numeric - semicircle_cdf_component(x, r)));
    }
    ok = ok && worst_quad <= 1e-10;
    return {ok, "branch gap cdf " + sci(worst_cdf) + ", error " + sci(worst_err) + " (tol 1e-12); |g(1)-15pi| " +
                    sci(g1_gap) + "; quadrature " + sci(worst_quad) + " (tol 1e-10)"};
}

// Expected normalized coupling error by integrating x^2 N dP against the finite-N density.
double coupling_error_by_quadrature(double alpha, const TheoryModel& tm) {
    const double n = tm.params.n;
    if (tm.regime == Regime::BulkDominated) {
        const double bulk = integrate_singular(
            [&](double x) {
                return x * x * 4.0 * (n - 1.0) / (kPi * n) * std::sqrt(std::max(0.0, 1.0 - (2.0 * x - 1.0) * (2.0 * x - 1.0)));
            },
            0.0, alpha);
        // (lambda_1 - lambda_N)^2 ~ 16 J1^2 when the bulk spans the whole range.
        return 16.0 / n * (n * bulk);
    }
    const double r = tm.r;
    const double bulk = integrate_singular(
        [&](double x) {
            return x * x * 4.0 * (n - 2.0) / (kPi * n * r * r) *
                   std::sqrt(std::max(0.0, r * r - (2.0 * x - r) * (2.0 * x - r)));
        },
        0.0, std::min(alpha, r));
    double top = 0.0;
    if (alpha > r) {
        top = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            [&](double x) { return x * x / ((1.0 - r) * n); }, r, alpha);
    }
    return 16.0 / (r * r * n) * (n * (bulk + top));
}

Outcome check_coupling_integral() {
    double worst = 0.0;
    bool ok = true;
    const std::vector<CouplingParams> cases = {
        {1.0, 0.1, 100}, {1.0, 0.3, 100}, {1.0, 0.3, 500}, {1.0, 1.0, 50}, {1.0, 10.0, 100}, {1.0, 2.0, 10}};
    for (const auto& cp : cases) {
        const TheoryModel tm = TheoryModel::from(cp);
        for (int j = 0; j <= 100; ++j) {
            const double alpha = j / 100.0;
            const double closed = coupling_error_theory_finite(alpha, tm);
            const double numeric = coupling_error_by_quadrature(alpha, tm);
            const double scale = std::max(std::abs(closed), std::abs(numeric));
            const double rel = scale == 0.0 ? 0.0 : std::abs(closed - numeric) / scale;
            worst = std::max(worst, rel);
            ok = ok && rel <= 1e-8;
        }
    }
    return {ok, "max rel " + sci(worst) + " (tol 1e-8) over 6 parameter sets x 101 alphas"};
}

Outcome check_cdf_monotone() {
    bool ok = true;
    double worst = 0.0;
    for (const auto& cp : {CouplingParams{1.0, 0.1, 100}, CouplingParams{1.0, 1.0, 100},
                           CouplingParams{1.0, 10.0, 100}, CouplingParams{1.0, 0.3, 10}}) {
        const TheoryModel tm = TheoryModel::from(cp);
        double prev_f = cdf_finite(0.0, tm);
        double prev_a = cdf_asymptotic(0.0, cp.j0, cp.j1);
        for (int j = 1; j <= 1000; ++j) {
            const double x = j / 1000.0;
            const double f = cdf_finite(x, tm);
            const double a = cdf_asymptotic(x, cp.j0, cp.j1);
            worst = std::min({worst, f - prev_f, a - prev_a});
            prev_f = f;
            prev_a = a;
        }
        ok = ok && worst >= -1e-12;
    }
    return {ok, "most negative increment " + sci(worst) + " (tol -1e-12)"};
}

Outcome check_scaling_law() {
    bool ok = true;
    double worst = 0.0;
    for (double ratio : {0.1, 0.3, 10.0}) {
        const TheoryModel base = TheoryModel::from(CouplingParams{1.0, ratio, 100});
        for (double c : {0.125, 4.0, 1024.0}) {
            const TheoryModel scaled = TheoryModel::from(CouplingParams{c, c * ratio, 100});
            for (int j = 0; j <= 1000; ++j) {
                const double x = j / 1000.0;
                const double gap = std::abs(cdf_finite(x, base) - cdf_finite(x, scaled));
                worst = std::max(worst, gap);
                ok = ok && gap == 0.0;
            }
        }
    }
    return {ok, "max |cdf(x; J0, J1) - cdf(x; cJ0, cJ1)| " + sci(worst) + " for power-of-two c"};
}

Outcome check_r_symmetry() {
    bool ok = true;
    for (double rho : {1e-3, 0.1, 0.3, 0.7, 1.0, 3.0, 10.0}) {
        ok = ok && r_value(1.0, rho) == r_value(rho, 1.0);
    }
    ok = ok && r_value(1.0, 1.0) == 1.0;
    return {ok, "r(J0, J1) == r(J1, J0) and r(1, 1) == 1"};
}

Outcome check_cdf_scaling_mc(const ExperimentRun& run) {
    double worst_set = 0.0;
    double worst_pair = 0.0;
    for (const auto& s : run.cdf_sets) worst_set = std::max(worst_set, s.summary.sup_deviation);
    for (const auto& d : run.pairwise) worst_pair = std::max(worst_pair, d.sup_difference);
    const double tol = run.config.tolerances.cdf_scaling;
    return {run.passed, "max sup dev " + fixed(worst_set) + ", max pairwise " + fixed(worst_pair) + " (tol " +
                            fixed(tol) + ")"};
}

Outcome check_convergence_mc(const ExperimentRun& run) {
    std::string detail;
    for (const auto& s : run.cdf_sets) {
        if (!detail.empty()) detail += ", ";
        detail += "N=" + std::to_string(s.summary.set.params.n) + " " + fixed(s.summary.sup_deviation);
    }
    return {run.passed, detail + " (tol " + fixed(run.config.tolerances.cdf_convergence) + " at largest N)"};
}

Outcome check_coupling_mc(const ExperimentRun& run) {
    bool ok = true;
    std::string detail;
    for (const auto& s : run.coupling_sets) {
        if (!s.summary.gated) continue;
        const auto& p = s.summary.set.params;
        const bool separated = regime_of(p.j0, p.j1) == Regime::BulkSeparated;
        ok = ok && s.max_relative_deviation <= run.config.tolerances.coupling_relative;
        if (separated) ok = ok && s.level_passed;
        if (!detail.empty()) detail += "; ";
        detail += "J1=" + format_double(p.j1) + " rel " + fixed(s.max_relative_deviation);
        if (separated) detail += " plateau " + fixed(s.plateau_level_deviation);
    }
    return {ok, detail};
}

Outcome check_plateau_onset(const ExperimentRun& run) {
    bool ok = true;
    std::string detail;
    for (const auto& s : run.coupling_sets) {
        const auto& p = s.summary.set.params;
        if (!s.summary.gated || regime_of(p.j0, p.j1) != Regime::BulkSeparated) continue;
        ok = ok && s.onset_passed;
        if (!detail.empty()) detail += "; ";
        detail += "J1=" + format_double(p.j1) + " onset " + fixed(s.plateau_onset) + " r " +
                  fixed(r_value(p.j0, p.j1));
    }
    return {ok, detail + " (tol " + fixed(run.config.tolerances.plateau_onset) + ")"};
}

}  // namespace

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const CheckResult* VerifyReport::first_failure() const {
    for (const auto& c : checks) {
        if (!c.passed) return &c;
    }
    return nullptr;
}

VerifyReport run_verify(const VerifyOptions& options) {
    VerifyReport report;
    auto record = [&](const std::string& name, const std::function<Outcome()>& check) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.checks.push_back({name, outcome.passed, outcome.detail, elapsed});
    };

    record("frobenius-identity", [&] { return check_frobenius_identity(options.seed); });
    record("theory-consistency", [&] { return check_theory_consistency(options.seed); });
    record("coupling-error-integral", [] { return check_coupling_integral(); });
    record("cdf-monotone", [] { return check_cdf_monotone(); });
    record("scaling-law-theory", [] { return check_scaling_law(); });
    record("r-symmetry", [] { return check_r_symmetry(); });

    if (!options.fast) {
        auto configured = [&](ExperimentKind kind) {
            ExperimentConfig cfg = ExperimentConfig::defaults(kind);
            cfg.master_seed = options.seed;
            cfg.threads = options.threads;
            return cfg;
        };
        auto save = [&](const ExperimentRun& run) {
            if (options.output_dir) {
                write_artifacts(run, (std::filesystem::path(*options.output_dir) / to_string(run.config.kind)).string());
            }
        };

        ExperimentRun scaling;
        record("cdf-scaling", [&] {
            scaling = run_cdf_scaling(configured(ExperimentKind::CdfScaling));
            save(scaling);
            return check_cdf_scaling_mc(scaling);
        });
        record("cdf-convergence", [&] {
            const auto run = run_cdf_convergence(configured(ExperimentKind::CdfConvergence));
            save(run);
            return check_convergence_mc(run);
        });
        ExperimentRun coupling;
        record("coupling-error", [&] {
            coupling = run_coupling_experiment(configured(ExperimentKind::Coupling));
            save(coupling);
            return check_coupling_mc(coupling);
        });
        record("plateau-onset", [&] { return check_plateau_onset(coupling); });
        record("determinism", [&] {
            const auto again = run_cdf_scaling(configured(ExperimentKind::CdfScaling));
            const bool same = render_artifacts(again) == render_artifacts(scaling);
            return Outcome{same, same ? "cdf-scaling rerun renders identical artifacts"
                                      : "cdf-scaling rerun differs from first run"};
        });
    }

    if (options.output_dir) {
        namespace fs = std::filesystem;
        fs::create_directories(*options.output_dir);
        std::ofstream(fs::path(*options.output_dir) / "verify_report.json", std::ios::binary)
            << render_report_json(report, options);
        std::ofstream(fs::path(*options.output_dir) / "verify_report.txt", std::ios::binary)
            << render_report_table(report);
    }
    return report;
}

std::string render_report_table(const VerifyReport& report) {
    std::string out;
    for (const auto& c : report.checks) {
        char head[64];
        std::snprintf(head, sizeof(head), "%-4s  %-24s  ", c.passed ? "PASS" : "FAIL", c.name.c_str());
        out += head + c.detail + "\n";
    }
    out += report.passed() ? "ALL CHECKS PASSED\n" : "SOME CHECKS FAILED\n";
    return out;
}

std::string render_report_json(const VerifyReport& report, const VerifyOptions& options) {
    nlohmann::ordered_json j;
    j["seed"] = options.seed;
    j["fast"] = options.fast;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
        j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    j["passed"] = report.passed();
    return j.dump(2) + "\n";
}

}  // namespace rmtnorm
