#include "rmtnorm/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rmtnorm/errors.hpp"

namespace rmtnorm {

namespace {

constexpr double kPi = std::numbers::pi;

void require_unit_interval(const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError(name, "must lie in [0, 1] (got " + std::to_string(v) + ")");
    }
}

void require_positive_coupling(const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ParameterError(name, "must be a finite positive number (got " + std::to_string(v) + ")");
    }
}

// Mass of the unit-height semicircle of diameter r over [0, x], normalized to 1 at x = r.
double semicircle_fraction(double x, double r) {
    return 4.0 * semicircle_cdf_component(x, r) / (kPi * r * r);
}

}  // namespace

const char* to_string(Regime regime) {
    return regime == Regime::BulkSeparated ? "bulk-separated" : "bulk-dominated";
}

Regime regime_of(double j0, double j1) {
    return j1 <= j0 ? Regime::BulkSeparated : Regime::BulkDominated;
}

double r_value(double j0, double j1) {
    require_positive_coupling("j0", j0);
    require_positive_coupling("j1", j1);
    const double rho = std::min(j0, j1) / std::max(j0, j1);
    const double one_plus = 1.0 + rho;
    return 4.0 * rho / (one_plus * one_plus);
}

TheoryModel TheoryModel::from(const CouplingParams& cp) {
    cp.validate();
    return TheoryModel{cp, regime_of(cp.j0, cp.j1), r_value(cp.j0, cp.j1)};
}

double semicircle_cdf_component(double x, double r) {
    if (!(r > 0.0 && r <= 1.0)) {
        throw DomainError("r", "must lie in (0, 1] (got " + std::to_string(r) + ")");
    }
    if (!(x >= 0.0 && x <= r)) {
        throw DomainError("x", "must lie in [0, r] (got " + std::to_string(x) + ")");
    }
    const double u = 2.0 * x - r;
    const double radical = std::sqrt(std::max(0.0, r * r - u * u));
    const double angle = std::asin(std::clamp(u / r, -1.0, 1.0));
    return 0.25 * (u * radical + r * r * angle) + kPi * r * r / 8.0;
}

double cdf_finite(double x, const TheoryModel& tm) {
    if (x <= 0.0) return 0.0;  // the atom at 0 is excluded by the strict inequality
    if (x >= 1.0) return 1.0;
    const double n = tm.params.n;
    if (tm.regime == Regime::BulkSeparated) {
        // r == 1 leaves the linear branch (r, 1] empty.
        if (x > tm.r) {
            return 1.0 + (x - 1.0) / ((1.0 - tm.r) * n);
        }
        return 1.0 / n + (n - 2.0) / n * semicircle_fraction(x, tm.r);
    }
    return 1.0 / n + (n - 1.0) / n * semicircle_fraction(x, 1.0);
}

double cdf_asymptotic(double x, double j0, double j1) {
    const double r = r_value(j0, j1);
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    if (regime_of(j0, j1) == Regime::BulkSeparated) {
        return x > r ? 1.0 : semicircle_fraction(x, r);
    }
    return semicircle_fraction(x, 1.0);
}

double g_function(double x) {
    require_unit_interval("x", x);
    const double poly = 15.0 + x * (10.0 + x * (8.0 - 48.0 * x));
    return 15.0 * (kPi - std::acos(2.0 * x - 1.0)) - 2.0 * std::sqrt(x * (1.0 - x)) * poly;
}

double coupling_error_theory_finite(double alpha, const TheoryModel& tm) {
    require_unit_interval("alpha", alpha);
    const double n = tm.params.n;
    if (tm.regime == Regime::BulkSeparated) {
        const double r = tm.r;
        if (alpha > r) {
            const double tail = 16.0 * (alpha * alpha * alpha - r * r * r) / ((1.0 - r) * r * r);
            return (15.0 * (n - 2.0) + tail) / (3.0 * n);
        }
        return (n - 2.0) / (3.0 * kPi * n) * g_function(alpha / r);
    }
    return (n - 1.0) / (3.0 * kPi * n) * g_function(alpha);
}

double coupling_error_theory_asymptotic(double alpha, double j0, double j1) {
    require_unit_interval("alpha", alpha);
    const double r = r_value(j0, j1);
    if (regime_of(j0, j1) == Regime::BulkSeparated) {
        return alpha > r ? 5.0 : g_function(alpha / r) / (3.0 * kPi);
    }
    return g_function(alpha) / (3.0 * kPi);
}

}  // namespace rmtnorm
