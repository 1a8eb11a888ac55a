#include "rmtnorm/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rmtnorm/errors.hpp"

namespace rmtnorm {

namespace {

constexpr double kClampTolerance = 1e-9;

void require_rank(int k, int lo, int hi) {
    if (k < lo || k > hi) {
        throw DomainError("rank", "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                      "] (got " + std::to_string(k) + ")");
    }
}

}  // namespace

SymmetricMatrix shifted_matrix(const SymmetricMatrix& q, double lam_n) {
    return q.shifted_by(-lam_n);
}

LowRankFactor low_rank_factor(const SymmetricMatrix& q, int k, double shift) {
    require_rank(k, 1, q.n());
    const EigenPairs pairs = eigen_pairs(shifted_matrix(q, shift));
    const auto& values = pairs.spectrum.values;
    const double scale = std::max(std::abs(values.front()), std::abs(values.back()));

    if (values.back() < -kClampTolerance * scale) {
        throw NumericalError("shifted eigenvalue " + std::to_string(values.back()) +
                             " is negative; the shift is not a lower bound of the spectrum");
    }

    LowRankFactor f;
    f.rank = k;
    f.shift = shift;
    f.v.resize(q.n(), k);
    for (int j = 0; j < k; ++j) {
        const double lam = std::max(0.0, values[static_cast<std::size_t>(j)]);
        f.v.col(j) = std::sqrt(lam) * pairs.vectors.col(j);
    }
    return f;
}

LowRankFactor low_rank_factor(const SymmetricMatrix& q, int k) {
    return low_rank_factor(q, k, spectrum(q).smallest());
}

double frobenius_residual(const SymmetricMatrix& q, double lam_n, const LowRankFactor& f) {
    if (f.v.rows() != q.n()) {
        throw DomainError("factor", "has " + std::to_string(f.v.rows()) + " rows, matrix has dimension " +
                                        std::to_string(q.n()));
    }
    const Eigen::MatrixXd approx = f.product();
    double sum = 0.0;
    for (int j = 0; j < q.n(); ++j) {
        for (int i = 0; i < q.n(); ++i) {
            const double target = q(i, j) - (i == j ? lam_n : 0.0);
            const double d = target - approx(i, j);
            sum += d * d;
        }
    }
    return sum;
}

double coupling_error_rank(const Spectrum& s, int k) {
    const int n = static_cast<int>(s.size());
    require_rank(k, 0, n);
    const double bottom = s.smallest();
    double sum = 0.0;
    for (int i = k; i < n; ++i) {
        const double d = s.values[static_cast<std::size_t>(i)] - bottom;
        sum += d * d;
    }
    return sum;
}

TruncationReport coupling_error_threshold(const Spectrum& s, double alpha, const CouplingParams& cp) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw DomainError("alpha", "must lie in [0, 1] (got " + std::to_string(alpha) + ")");
    }
    cp.validate();
    if (s.values.empty()) {
        throw DegenerateSpectrumError("empty spectrum");
    }
    if (static_cast<int>(s.size()) != cp.n) {
        throw DomainError("n", "spectrum has " + std::to_string(s.size()) + " eigenvalues, expected " +
                                   std::to_string(cp.n));
    }
    const double bottom = s.smallest();
    const double spread = s.largest() - bottom;
    if (!(spread > 0.0)) {
        throw DegenerateSpectrumError("largest and smallest eigenvalue coincide");
    }
    const double cut = alpha * spread;

    TruncationReport report;
    report.alpha = alpha;
    // Descending order: the dropped eigenvalues form a trailing block.
    const auto first_dropped =
        std::find_if(s.values.begin(), s.values.end(), [&](double v) { return v - bottom < cut; });
    report.kept_count = static_cast<int>(first_dropped - s.values.begin());
    report.raw_error = coupling_error_rank(s, report.kept_count);
    report.normalized_error = report.raw_error / (cp.n * cp.j1 * cp.j1);
    return report;
}

}  // namespace rmtnorm
