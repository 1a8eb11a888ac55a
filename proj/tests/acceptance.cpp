// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff every criterion passes.
// Thresholds are fixed here and do not read the library's configurable tolerances.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "rmtnorm/experiments.hpp"
#include "rmtnorm/factorization.hpp"
#include "rmtnorm/theory.hpp"

#ifndef RMTNORM_CLI_PATH
#error "RMTNORM_CLI_PATH must point at the rmtnorm executable"
#endif

namespace fs = std::filesystem;
using namespace rmtnorm;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

Outcome frobenius_identity() {
    double worst_rel = 0.0, worst_full = 0.0;
    for (int n : {10, 50}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            RngStream st(seed, 0, static_cast<std::uint64_t>(n));
            const auto q = sample_matrix(params_from_couplings({1.0, 0.3, n}), st);
            const auto s = spectrum(q);
            for (int k : {1, n / 2, n - 1, n}) {
                const double res = frobenius_residual(q, s.smallest(), low_rank_factor(q, k));
                const double tail = oracle::tail_sum(s.values, k);
                if (tail > 0.0) {
                    worst_rel = std::max(worst_rel, std::abs(res - tail) / tail);
                } else {
                    worst_full = std::max(worst_full, std::sqrt(res) / q.frobenius_norm());
                }
                if (k == n) worst_full = std::max(worst_full, std::sqrt(res) / q.frobenius_norm());
            }
        }
    }
    return {worst_rel <= 1e-9 && worst_full <= 1e-8,
            "max rel |residual - tail| " + fmt(worst_rel) + ", full-rank residual/||Q|| " + fmt(worst_full)};
}

Outcome theory_consistency() {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double cdf_gap = 0.0, err_gap = 0.0;
    bool cdf_one = true;
    for (int i = 0; i < 50; ++i) {
        const int n = 3 + static_cast<int>(u(gen) * 997);
        const double rho = 0.01 + 0.98 * u(gen);
        const auto tm = TheoryModel::from({1.0, rho, n});
        const double above = std::nextafter(tm.r, 2.0);
        cdf_gap = std::max(cdf_gap, std::abs(cdf_finite(above, tm) - cdf_finite(tm.r, tm)));
        err_gap = std::max(err_gap, std::abs(coupling_error_theory_finite(above, tm) -
                                             coupling_error_theory_finite(tm.r, tm)));
        cdf_one = cdf_one && cdf_finite(1.0, tm) == 1.0 && cdf_finite(1.0, TheoryModel::from({1.0, 1.0 / rho, n})) == 1.0;
    }
    const bool g_ok = g_function(0.0) == 0.0 && std::abs(g_function(1.0) - 15.0 * std::numbers::pi) <= 1e-12;
    double quad = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double r = 0.01 + 0.99 * u(gen);
        const double x = r * u(gen);
        quad = std::max(quad, std::abs(semicircle_cdf_component(x, r) - oracle::semicircle_area(x, r)));
    }
    return {cdf_gap <= 1e-12 && err_gap <= 1e-12 && cdf_one && g_ok && quad <= 1e-10,
            "branch gap cdf " + fmt(cdf_gap) + ", error " + fmt(err_gap) + "; cdf(1)=1 " + (cdf_one ? "yes" : "no") +
                "; g ends " + (g_ok ? "ok" : "off") + "; quadrature " + fmt(quad)};
}

Outcome coupling_integral() {
    double worst = 0.0;
    for (auto [j1, n] : {std::pair{0.1, 500}, {0.3, 100}, {0.9, 10}, {1.0, 50}, {1.5, 20}, {10.0, 500}}) {
        const auto tm = TheoryModel::from({1.0, j1, n});
        for (int i = 1; i <= 100; ++i) {
            const double a = i / 100.0;
            const double want = oracle::coupling_error(a, n, 1.0, j1);
            worst = std::max(worst, std::abs(coupling_error_theory_finite(a, tm) - want) / want);
        }
    }
    return {worst <= 1e-8, "max relative deviation from density integral " + fmt(worst)};
}

Outcome cdf_scaling(std::uint64_t seed) {
    auto cfg = ExperimentConfig::defaults(ExperimentKind::CdfScaling);
    cfg.master_seed = seed;
    const auto run = run_experiment(cfg);
    double sup = 0.0, pair = 0.0;
    for (const auto& s : run.cdf_sets) {
        const auto tm = TheoryModel::from(s.summary.set.params);
        sup = std::max(sup, sup_deviation(s.pooled, [&](double x) { return cdf_finite(x, tm); }));
    }
    for (std::size_t a = 0; a < run.cdf_sets.size(); ++a)
        for (std::size_t b = a + 1; b < run.cdf_sets.size(); ++b) {
            const auto& sa = run.cdf_sets[a].summary.set;
            const auto& sb = run.cdf_sets[b].summary.set;
            if (sa.ratio == sb.ratio && sa.params.n == sb.params.n)
                pair = std::max(pair, sup_difference(run.cdf_sets[a].pooled, run.cdf_sets[b].pooled));
        }
    return {run.cdf_sets.size() == 9 && sup <= 0.06 && pair <= 0.06,
            "max sup deviation " + fmt(sup) + ", max pairwise difference " + fmt(pair)};
}

Outcome cdf_convergence(std::uint64_t seed) {
    auto cfg = ExperimentConfig::defaults(ExperimentKind::CdfConvergence);
    cfg.master_seed = seed;
    const auto run = run_experiment(cfg);
    std::map<int, double> dev;
    for (const auto& s : run.cdf_sets) {
        const auto& p = s.summary.set.params;
        dev[p.n] = sup_deviation(s.pooled, [&](double x) { return cdf_asymptotic(x, p.j0, p.j1); });
    }
    const double d10 = dev.at(10), d500 = dev.at(500);
    return {d500 <= 0.03 && d500 < d10, "sup deviation N=10 " + fmt(d10) + ", N=500 " + fmt(d500)};
}

struct CouplingOutcomes {
    Outcome level;
    Outcome onset;
};

CouplingOutcomes coupling(std::uint64_t seed) {
    auto cfg = ExperimentConfig::defaults(ExperimentKind::Coupling);
    cfg.master_seed = seed;
    const auto run = run_experiment(cfg);
    CouplingOutcomes out;
    std::string level_detail, onset_detail;
    for (const auto& s : run.coupling_sets) {
        const auto& p = s.summary.set.params;
        if (p.n != 500) continue;
        const auto tm = TheoryModel::from(p);
        const auto& c = s.curve;
        double rel = 0.0, worst_alpha = 0.0, plateau = 0.0, at_hi = 0.0;
        for (std::size_t i = 0; i < c.alphas.size(); ++i) {
            const double a = c.alphas[i];
            if (a < 0.05 - 1e-12 || a > 0.95 + 1e-12) continue;
            const double th = coupling_error_theory_finite(a, tm);
            const double d = std::abs(c.mean[i] - th) / th;
            if (d > rel) {
                rel = d;
                worst_alpha = a;
            }
            if (tm.regime == Regime::BulkSeparated && a > tm.r) {
                const double target = 5.0 * (p.n - 2.0) / p.n;
                plateau = std::max(plateau, std::abs(c.mean[i] - target) / target);
            }
            at_hi = c.mean[i];
        }
        bool ok = rel <= 0.05;
        level_detail += (level_detail.empty() ? "" : "; ") + std::string("J1=") + format_double(p.j1) + " rel " +
                        fmt(rel) + " at alpha " + format_double(worst_alpha);
        if (tm.regime == Regime::BulkSeparated) {
            ok = ok && plateau <= 0.02;
            level_detail += ", plateau " + fmt(plateau);

            double onset = 1.0;
            for (std::size_t i = 0; i < c.alphas.size(); ++i)
                if (c.mean[i] >= 0.99 * at_hi) {
                    onset = c.alphas[i];
                    break;
                }
            const bool onset_ok = std::abs(onset - tm.r) <= 0.1;
            out.onset.passed = out.onset.passed && onset_ok;
            onset_detail += (onset_detail.empty() ? "" : "; ") + std::string("J1/J0=") + format_double(p.j1 / p.j0) +
                            " onset " + format_double(onset) + " vs r " + fmt(tm.r);
        }
        out.level.passed = out.level.passed && ok;
    }
    out.level.detail = level_detail;
    out.onset.detail = onset_detail;
    return out;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream f(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        files[fs::relative(e.path(), root).generic_string()] = ss.str();
    }
    return files;
}

Outcome determinism(std::uint64_t seed) {
    const fs::path base = fs::temp_directory_path() / ("rmtnorm_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(base);
    std::map<std::string, std::string> trees[2];
    for (int i = 0; i < 2; ++i) {
        const fs::path dir = base / ("run" + std::to_string(i));
        const std::string cmd = std::string("\"") + RMTNORM_CLI_PATH + "\" verify --seed " + std::to_string(seed) +
                                " --out \"" + dir.string() + "\" > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        (void)rc;
        if (fs::exists(dir)) trees[i] = read_tree(dir);
    }
    fs::remove_all(base);
    std::size_t csv = 0, json = 0;
    for (const auto& [name, _] : trees[0]) {
        csv += name.ends_with(".csv");
        json += name.ends_with(".json");
    }
    const bool same = !trees[0].empty() && trees[0] == trees[1];
    return {same && csv > 0 && json > 0, std::to_string(trees[0].size()) + " files (" + std::to_string(csv) +
                                             " csv, " + std::to_string(json) + " json), " +
                                             (same ? "byte-identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
    std::uint64_t seed = 42;
    if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);

    bool all = true;
    const auto report = [&](int id, const char* name, double limit_s, const std::function<Outcome()>& f) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (limit_s > 0.0 && dt > limit_s) {
            o.passed = false;
            o.detail += "; runtime " + fmt(dt) + " s exceeds " + fmt(limit_s) + " s";
        }
        all = all && o.passed;
        std::cout << "criterion " << id << " [" << name << "]: " << (o.passed ? "PASS" : "FAIL") << "  " << o.detail
                  << "  (" << fmt(dt) << " s)\n"
                  << std::flush;
    };

    report(1, "frobenius identity", 5.0, frobenius_identity);
    report(2, "theory self-consistency", 5.0, theory_consistency);
    report(3, "coupling error integral", 10.0, coupling_integral);
    report(4, "cdf scaling law", 60.0, [&] { return cdf_scaling(seed); });
    report(5, "cdf convergence", 120.0, [&] { return cdf_convergence(seed); });

    CouplingOutcomes cpl;
    report(6, "coupling error curve", 300.0, [&] {
        cpl = coupling(seed);
        return cpl.level;
    });
    report(7, "plateau onset", 0.0, [&] { return cpl.onset; });
    report(8, "determinism", 0.0, [&] { return determinism(seed); });

    std::cout << (all ? "all criteria passed" : "some criteria failed") << "\n";
    return all ? 0 : 1;
}
