#pragma once

#include "rmtnorm/ensemble.hpp"

namespace rmtnorm {

/// BulkSeparated: J1 <= J0, the largest eigenvalue detaches from the semicircle bulk.
/// BulkDominated: J1 > J0, the bulk absorbs it.
enum class Regime { BulkSeparated, BulkDominated };

const char* to_string(Regime regime);

Regime regime_of(double j0, double j1);

/// Normalized position of the second-largest eigenvalue, 4 rho / (1 + rho)^2 with rho = J1 / J0.
/// Evaluated on min(J0, J1) / max(J0, J1) so that r(J0, J1) and r(J1, J0) are bit-identical.
double r_value(double j0, double j1);

/// Closed-form theory for one parameter set. Only (N, J1/J0) enters any evaluation.
struct TheoryModel {
    CouplingParams params;
    Regime regime = Regime::BulkSeparated;
    double r = 1.0;

    static TheoryModel from(const CouplingParams& cp);
};

/// Integral of sqrt(r^2 - (2t - r)^2) over [0, x] for 0 <= x <= r, in closed form:
/// 1/4 [(2x - r) sqrt(r^2 - (2x - r)^2) + r^2 asin((2x - r) / r)] + pi r^2 / 8.
double semicircle_cdf_component(double x, double r);

/// Finite-N CDF P(normalized eigenvalue < x). Total: 0 up to and including 0, 1 from 1 on;
/// the right limit at 0 is 1/N.
double cdf_finite(double x, const TheoryModel& tm);

/// Large-N limit of cdf_finite.
double cdf_asymptotic(double x, double j0, double j1);

/// g(x) = 15 (pi - acos(2x - 1)) - 2 sqrt(x (1 - x)) (15 + 10x + 8x^2 - 48x^3), x in [0, 1].
double g_function(double x);

/// Expected coupling error after dropping normalized eigenvalues below alpha, in units of N J1^2.
/// Throws DomainError for alpha outside [0, 1].
double coupling_error_theory_finite(double alpha, const TheoryModel& tm);

/// Large-N limit of coupling_error_theory_finite: 5 on the plateau alpha > r when J1 <= J0.
double coupling_error_theory_asymptotic(double alpha, double j0, double j1);

}  // namespace rmtnorm
