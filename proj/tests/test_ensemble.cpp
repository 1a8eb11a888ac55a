#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "rmtnorm/ensemble.hpp"
#include "rmtnorm/errors.hpp"
#include "rmtnorm/rng.hpp"

using namespace rmtnorm;

TEST_CASE("params_from_couplings") {
    auto rp = params_from_couplings({1.0, 0.3, 100});
    CHECK(rp.mu == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(rp.sigma == doctest::Approx(0.03).epsilon(1e-15));
    CHECK(rp.n == 100);

    rp = params_from_couplings({0.1, 0.01, 100});
    CHECK(rp.mu == doctest::Approx(0.001).epsilon(1e-15));
    CHECK(rp.sigma == doctest::Approx(0.001).epsilon(1e-15));

    CHECK_THROWS_AS(params_from_couplings({1.0, 1.0, 1}), ParameterError);
    CHECK_THROWS_AS(params_from_couplings({1.0, 1.0, 2}), ParameterError);
    CHECK_THROWS_AS(params_from_couplings({0.0, 1.0, 10}), ParameterError);
    CHECK_THROWS_AS(params_from_couplings({1.0, -1.0, 10}), ParameterError);
    try {
        params_from_couplings({1.0, 1.0, 2});
    } catch (const ParameterError& e) {
        CHECK(e.parameter() == "n");
    }
}

TEST_CASE("raw params reject non-positive mean") {
    CHECK_THROWS_AS((RawParams{0.0, 1.0, 10}.validate()), ParameterError);
    CHECK_THROWS_AS((RawParams{-1.0, 1.0, 10}.validate()), ParameterError);
    CHECK_NOTHROW((RawParams{0.1, 1.0, 10}.validate()));
}

TEST_CASE("rng streams are addressed, not advanced") {
    RngStream a(42, 3, 7), b(42, 3, 7), c(42, 3, 8), d(42, 4, 7);
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(x != d.next_u64());

    RngStream u(1);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        CHECK((v >= 0.0 && v < 1.0));
    }
}

TEST_CASE("gaussian moments") {
    RngStream s(2024);
    const int count = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < count; ++i) {
        const double g = s.gaussian(3.0, 2.0);
        sum += g;
        sq += g * g;
    }
    const double mean = sum / count;
    const double var = sq / count - mean * mean;
    CHECK(std::abs(mean - 3.0) < 5.0 * 2.0 / std::sqrt(count));
    CHECK(std::abs(var - 4.0) < 0.05 * 4.0);
}

TEST_CASE("sample_matrix degenerate sigma") {
    RawParams rp{0.25, 1e-300, 20};
    RngStream s(42, 0, 0);
    const auto m = sample_matrix(rp, s);
    for (int i = 0; i < rp.n; ++i)
        for (int j = 0; j < rp.n; ++j) CHECK(std::abs(m(i, j) - rp.mu) < 1e-6);
}

TEST_CASE("sample_matrix off-diagonal mean and diagonal variance") {
    const CouplingParams cp{1.0, 0.3, 500};
    const auto rp = params_from_couplings(cp);
    double off_sum = 0.0, diag_sq = 0.0;
    std::size_t off_count = 0, diag_count = 0;
    for (int t = 0; t < 20; ++t) {
        RngStream s(42, 0, t);
        const auto m = sample_matrix(rp, s);
        for (int i = 0; i < cp.n; ++i) {
            const double d = m(i, i) - rp.mu;
            diag_sq += d * d;
            ++diag_count;
            for (int j = i + 1; j < cp.n; ++j) {
                off_sum += m(i, j);
                ++off_count;
            }
        }
    }
    const double off_mean = off_sum / static_cast<double>(off_count);
    CHECK(std::abs(off_mean - rp.mu) <= 4.0 * rp.sigma / std::sqrt(static_cast<double>(off_count)));
    const double diag_var = diag_sq / static_cast<double>(diag_count);
    CHECK(diag_var == doctest::Approx(2.0 * rp.sigma * rp.sigma).epsilon(0.06));
}

TEST_CASE("sample_matrix is exactly symmetric and deterministic") {
    const auto rp = params_from_couplings({1.0, 0.3, 50});
    RngStream a(7, 1, 2), b(7, 1, 2), c(7, 1, 3);
    const auto ma = sample_matrix(rp, a);
    const auto mb = sample_matrix(rp, b);
    const auto mc = sample_matrix(rp, c);
    CHECK(ma.entries() == ma.entries().transpose());
    CHECK(ma.entries() == mb.entries());
    CHECK(ma.entries() != mc.entries());
}

TEST_CASE("SymmetricMatrix rejects asymmetric input") {
    Eigen::MatrixXd m(2, 2);
    m << 1, 2, 3, 4;
    CHECK_THROWS_AS(SymmetricMatrix{m}, ParameterError);
    CHECK_THROWS_AS(SymmetricMatrix{Eigen::MatrixXd(2, 3)}, ParameterError);
    const auto up = SymmetricMatrix::from_upper(m);
    CHECK(up(1, 0) == 2.0);
}

TEST_CASE("spectrum examples") {
    const auto s = spectrum(SymmetricMatrix::diagonal({1.0, 3.0, 2.0}));
    CHECK(s.values == std::vector<double>{3.0, 2.0, 1.0});

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
    m(0, 1) = m(1, 0) = 1.0;
    const auto p = spectrum(SymmetricMatrix(m));
    CHECK(p.values[0] == doctest::Approx(1.0));
    CHECK(p.values[1] == doctest::Approx(0.0));
    CHECK(p.values[2] == doctest::Approx(-1.0));
}

TEST_CASE("trace identity and reconstruction on random samples") {
    for (int n : {5, 40, 120}) {
        RngStream st(99, 0, n);
        const auto m = sample_matrix(params_from_couplings({1.0, 0.7, n}), st);
        const auto s = spectrum(m);
        REQUIRE(s.size() == static_cast<std::size_t>(n));
        CHECK(std::is_sorted(s.values.begin(), s.values.end(), std::greater<>()));
        const double sum = std::accumulate(s.values.begin(), s.values.end(), 0.0);
        CHECK(std::abs(m.trace() - sum) <= 1e-9 * n * m.entries().cwiseAbs().maxCoeff());

        const auto ep = eigen_pairs(m);
        const Eigen::VectorXd lam = Eigen::Map<const Eigen::VectorXd>(ep.spectrum.values.data(), n);
        const Eigen::MatrixXd rec = ep.vectors * lam.asDiagonal() * ep.vectors.transpose();
        CHECK((m.entries() - rec).norm() / m.frobenius_norm() <= 1e-10);
    }
}

TEST_CASE("normalize examples") {
    const auto ns = normalize(Spectrum{{3.0, 2.0, 1.0}});
    CHECK(ns.values == std::vector<double>{1.0, 0.5, 0.0});
    CHECK_THROWS_AS(normalize(Spectrum{{5.0, 5.0, 5.0}}), DegenerateSpectrumError);

    const auto sampled = sample_normalized_spectrum({1.0, 0.3, 100}, 42, 0, 0);
    CHECK(sampled.values.front() == 1.0);
    CHECK(sampled.values.back() == 0.0);
    for (double v : sampled.values) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("normalization is shift invariant") {
    RngStream st(5, 0, 0);
    const auto m = sample_matrix(params_from_couplings({1.0, 0.3, 60}), st);
    const auto a = normalize(spectrum(m));
    for (double c : {-3.5, 0.25, 10.0}) {
        const auto b = normalize(spectrum(m.shifted_by(c)));
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-9);
    }
}

TEST_CASE("expected_extremes") {
    auto e = expected_extremes({1.0, 0.3, 100});
    CHECK(e.lam1 == doctest::Approx(1.09).epsilon(1e-14));
    CHECK(e.lam2 == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(e.lam_n == doctest::Approx(-0.6).epsilon(1e-14));

    e = expected_extremes({1.0, 1.0, 100});
    CHECK(e.lam1 == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(e.lam2 == doctest::Approx(2.0).epsilon(1e-14));

    for (double j1 : {0.01, 0.5, 3.0}) {
        e = expected_extremes({0.7, j1, 37});
        CHECK(e.lam2 == -e.lam_n);
    }
}

TEST_CASE("largest and smallest eigenvalue near their expected locations") {
    const CouplingParams cp{1.0, 0.3, 500};
    const auto rp = params_from_couplings(cp);
    double lam1 = 0.0, lam_n = 0.0;
    for (int t = 0; t < 20; ++t) {
        RngStream st(42, 0, t);
        const auto s = spectrum(sample_matrix(rp, st));
        lam1 += s.largest() / 20.0;
        lam_n += s.smallest() / 20.0;
    }
    const auto e = expected_extremes(cp);
    CHECK(std::abs(lam1 - e.lam1) <= 0.05 * std::abs(e.lam1));
    CHECK(std::abs(lam_n - e.lam_n) <= 0.10 * std::abs(e.lam_n));
}

TEST_CASE("sample_normalized_spectrum is a pure function of its arguments") {
    const CouplingParams cp{1.0, 0.3, 80};
    const auto a = sample_normalized_spectrum(cp, 11, 2, 3);
    const auto b = sample_normalized_spectrum(cp, 11, 2, 3);
    const auto c = sample_normalized_spectrum(cp, 11, 2, 4);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
}
