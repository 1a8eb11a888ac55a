#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rmtnorm {

struct VerifyOptions {
    std::uint64_t seed = 42;
    /// Analytic checks only; skips every Monte Carlo run.
    bool fast = false;
    int threads = 0;
    /// When set, experiment artifacts and the report are written under this directory.
    std::optional<std::string> output_dir;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double wall_time_s = 0.0;
};

struct VerifyReport {
    std::vector<CheckResult> checks;

    bool passed() const;
    const CheckResult* first_failure() const;
};

VerifyReport run_verify(const VerifyOptions& options);

/// Fixed-width pass/fail table. Contains no timings, so equal inputs give equal text.
std::string render_report_table(const VerifyReport& report);

std::string render_report_json(const VerifyReport& report, const VerifyOptions& options);

}  // namespace rmtnorm
