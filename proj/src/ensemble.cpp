#include "rmtnorm/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rmtnorm/errors.hpp"

namespace rmtnorm {

namespace {

void require_positive(const char* name, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ParameterError(name, "must be a finite positive number (got " + std::to_string(value) + ")");
    }
}

void require_dimension(int n) {
    if (n < 3) {
        throw ParameterError("n", "must be >= 3 (got " + std::to_string(n) + ")");
    }
}

// Solver output is ascending; a stable sort on descending value keeps solver order for ties.
std::vector<int> descending_order(const Eigen::VectorXd& ascending) {
    const int n = static_cast<int>(ascending.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return ascending(a) > ascending(b); });
    return order;
}

}  // namespace

void CouplingParams::validate() const {
    require_positive("j0", j0);
    require_positive("j1", j1);
    require_dimension(n);
}

void RawParams::validate() const {
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw ParameterError("mu", "must be a finite positive number (got " + std::to_string(mu) + ")");
    }
    require_positive("sigma", sigma);
    require_dimension(n);
}

RawParams params_from_couplings(const CouplingParams& cp) {
    cp.validate();
    return RawParams{cp.j0 / cp.n, cp.j1 / std::sqrt(static_cast<double>(cp.n)), cp.n};
}

SymmetricMatrix SymmetricMatrix::from_upper(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) {
        throw ParameterError("matrix", "must be square");
    }
    Eigen::MatrixXd full = m.triangularView<Eigen::Upper>();
    full.triangularView<Eigen::StrictlyLower>() = full.transpose().triangularView<Eigen::StrictlyLower>();
    return SymmetricMatrix(std::move(full), Unchecked{});
}

SymmetricMatrix::SymmetricMatrix(Eigen::MatrixXd m) : entries_(std::move(m)) {
    if (entries_.rows() != entries_.cols()) {
        throw ParameterError("matrix", "must be square");
    }
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            if (entries_(i, j) != entries_(j, i)) {
                throw ParameterError("matrix", "must be exactly symmetric");
            }
        }
    }
}

SymmetricMatrix SymmetricMatrix::diagonal(const std::vector<double>& d) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.size()),
                                              static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
    }
    return SymmetricMatrix(std::move(m), Unchecked{});
}

SymmetricMatrix SymmetricMatrix::shifted_by(double c) const {
    Eigen::MatrixXd m = entries_;
    m.diagonal().array() += c;
    return SymmetricMatrix(std::move(m), Unchecked{});
}

SymmetricMatrix sample_matrix(const RawParams& rp, RngStream& stream) {
    rp.validate();
    const int n = rp.n;
    const double diag_std = std::sqrt(2.0) * rp.sigma;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = stream.gaussian(rp.mu, diag_std);
        for (int j = i + 1; j < n; ++j) {
            const double q = stream.gaussian(rp.mu, rp.sigma);
            m(i, j) = q;
            m(j, i) = q;
        }
    }
    return SymmetricMatrix(std::move(m));
}

Spectrum spectrum(const SymmetricMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.entries(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigensolver did not converge");
    }
    const Eigen::VectorXd& ev = solver.eigenvalues();
    Spectrum s;
    s.values.reserve(static_cast<std::size_t>(ev.size()));
    for (int idx : descending_order(ev)) {
        s.values.push_back(ev(idx));
    }
    return s;
}

EigenPairs eigen_pairs(const SymmetricMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.entries(), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigensolver did not converge");
    }
    const Eigen::VectorXd& ev = solver.eigenvalues();
    const auto order = descending_order(ev);
    EigenPairs out;
    out.spectrum.values.reserve(order.size());
    out.vectors.resize(m.n(), m.n());
    for (std::size_t k = 0; k < order.size(); ++k) {
        out.spectrum.values.push_back(ev(order[k]));
        out.vectors.col(static_cast<Eigen::Index>(k)) = solver.eigenvectors().col(order[k]);
    }
    return out;
}

NormalizedSpectrum normalize(const Spectrum& s) {
    if (s.values.empty()) {
        throw DegenerateSpectrumError("empty spectrum");
    }
    const double top = s.largest();
    const double bottom = s.smallest();
    const double spread = top - bottom;
    if (!(spread > 0.0)) {
        throw DegenerateSpectrumError("largest and smallest eigenvalue coincide");
    }
    NormalizedSpectrum out;
    out.values.reserve(s.size());
    for (double v : s.values) {
        out.values.push_back(std::clamp((v - bottom) / spread, 0.0, 1.0));
    }
    out.values.front() = 1.0;
    out.values.back() = 0.0;
    return out;
}

ExpectedExtremes expected_extremes(const CouplingParams& cp) {
    const RawParams rp = params_from_couplings(cp);
    const double root_n = std::sqrt(static_cast<double>(cp.n));
    return ExpectedExtremes{cp.n * rp.mu + rp.sigma * rp.sigma / rp.mu, 2.0 * root_n * rp.sigma,
                            -2.0 * root_n * rp.sigma};
}

NormalizedSpectrum sample_normalized_spectrum(const CouplingParams& cp, std::uint64_t master_seed,
                                              std::uint64_t set_index, std::uint64_t trial_index) {
    RngStream stream(master_seed, set_index, trial_index);
    return normalize(spectrum(sample_matrix(params_from_couplings(cp), stream)));
}

}  // namespace rmtnorm
