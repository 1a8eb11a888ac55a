#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "rmtnorm/rng.hpp"

namespace rmtnorm {

/// Spin-glass parameterization of the ensemble: mean coupling J0, disorder J1, dimension N.
struct CouplingParams {
    double j0 = 1.0;
    double j1 = 1.0;
    int n = 3;

    /// Throws ParameterError naming the first invalid field.
    void validate() const;

    double ratio() const { return j1 / j0; }
};

/// Element-level parameters: off-diagonal entries ~ N(mu, sigma^2), diagonal ~ N(mu, 2 sigma^2).
struct RawParams {
    double mu = 0.0;
    double sigma = 1.0;
    int n = 3;

    void validate() const;
};

/// mu = J0 / N, sigma = J1 / sqrt(N).
RawParams params_from_couplings(const CouplingParams& cp);

/// Real symmetric matrix. Symmetry is exact: every constructor mirrors the upper triangle.
class SymmetricMatrix {
public:
    /// Mirrors the upper triangle (diagonal included) of `m` into the lower triangle.
    static SymmetricMatrix from_upper(const Eigen::MatrixXd& m);

    /// Throws ParameterError unless `m` is square and exactly symmetric.
    explicit SymmetricMatrix(Eigen::MatrixXd m);

    static SymmetricMatrix diagonal(const std::vector<double>& d);

    int n() const { return static_cast<int>(entries_.rows()); }
    double operator()(int i, int j) const { return entries_(i, j); }
    const Eigen::MatrixXd& entries() const { return entries_; }

    double trace() const { return entries_.trace(); }
    double frobenius_norm() const { return entries_.norm(); }

    /// Returns this + c I.
    SymmetricMatrix shifted_by(double c) const;

private:
    struct Unchecked {};
    SymmetricMatrix(Eigen::MatrixXd m, Unchecked) : entries_(std::move(m)) {}

    Eigen::MatrixXd entries_;
};

/// Eigenvalues of one matrix, sorted descending.
struct Spectrum {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double largest() const { return values.front(); }
    double smallest() const { return values.back(); }
};

/// Min-max normalized spectrum: descending, first element exactly 1, last exactly 0.
struct NormalizedSpectrum {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

/// Eigenpairs sorted by descending eigenvalue; column i of `vectors` belongs to `values[i]`.
struct EigenPairs {
    Spectrum spectrum;
    Eigen::MatrixXd vectors;
};

struct ExpectedExtremes {
    double lam1 = 0.0;
    double lam2 = 0.0;
    double lam_n = 0.0;
};

/// Draws one matrix. Entries are consumed from `stream` row by row over the upper triangle,
/// diagonal included, so equal (rp, stream state) gives a bit-identical matrix.
SymmetricMatrix sample_matrix(const RawParams& rp, RngStream& stream);

/// Eigenvalues only. Throws NumericalError if the solver does not converge.
Spectrum spectrum(const SymmetricMatrix& m);

/// Eigenvalues and orthonormal eigenvectors.
EigenPairs eigen_pairs(const SymmetricMatrix& m);

/// (lambda - lambda_N) / (lambda_1 - lambda_N). Throws DegenerateSpectrumError when lambda_1 == lambda_N.
NormalizedSpectrum normalize(const Spectrum& s);

/// Deterministic large-N locations of lambda_1, lambda_2 and lambda_N:
/// N mu + sigma^2 / mu, 2 sqrt(N) sigma and -2 sqrt(N) sigma.
ExpectedExtremes expected_extremes(const CouplingParams& cp);

/// Normalized spectrum of one seeded draw; a pure function of its arguments.
NormalizedSpectrum sample_normalized_spectrum(const CouplingParams& cp, std::uint64_t master_seed,
                                              std::uint64_t set_index, std::uint64_t trial_index);

}  // namespace rmtnorm
