#pragma once

#include <Eigen/Dense>

#include "rmtnorm/ensemble.hpp"

namespace rmtnorm {

/// Rank-k factor V (n x k) with V V^T approximating Q - shift I.
/// Column j is sqrt(lambda_j - shift) times the j-th leading eigenvector.
struct LowRankFactor {
    Eigen::MatrixXd v;
    int rank = 0;
    double shift = 0.0;

    Eigen::MatrixXd product() const { return v * v.transpose(); }
};

/// Coupling error for one threshold alpha.
struct TruncationReport {
    double alpha = 0.0;
    /// Eigenvalues that survive truncation; always a leading block of the descending spectrum.
    int kept_count = 0;
    /// Squared Frobenius units.
    double raw_error = 0.0;
    /// raw_error / (N J1^2).
    double normalized_error = 0.0;
};

/// Q - lam_n I.
SymmetricMatrix shifted_matrix(const SymmetricMatrix& q, double lam_n);

/// Rank-k factor of Q - shift I from its leading eigenpairs. Shifted eigenvalues in
/// [-1e-9 scale, 0) are clamped to 0; anything more negative means `shift` is not a lower bound
/// of the spectrum and raises NumericalError. Throws DomainError unless 1 <= k <= n.
LowRankFactor low_rank_factor(const SymmetricMatrix& q, int k, double shift);

/// Same, shifting by the smallest eigenvalue of q.
LowRankFactor low_rank_factor(const SymmetricMatrix& q, int k);

/// ||Q - lam_n I - V V^T||_F^2 summed entry by entry.
double frobenius_residual(const SymmetricMatrix& q, double lam_n, const LowRankFactor& f);

/// Sum over the n - k smallest eigenvalues of (lambda_i - lambda_N)^2, 0 <= k <= n.
double coupling_error_rank(const Spectrum& s, int k);

/// Drops every eigenvalue with lambda_i - lambda_N < alpha (lambda_1 - lambda_N) and sums their
/// squared shifted values. Uses the sample's own lambda_1 - lambda_N.
TruncationReport coupling_error_threshold(const Spectrum& s, double alpha, const CouplingParams& cp);

}  // namespace rmtnorm
