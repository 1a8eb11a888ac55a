#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "rmtnorm/ensemble.hpp"
#include "rmtnorm/errors.hpp"
#include "rmtnorm/experiments.hpp"
#include "rmtnorm/factorization.hpp"
#include "rmtnorm/theory.hpp"
#include "rmtnorm/verify.hpp"

namespace py = pybind11;
using namespace rmtnorm;

namespace {

Spectrum as_spectrum(std::vector<double> values) {
    if (!std::is_sorted(values.begin(), values.end(), std::greater<>())) {
        throw ParameterError("spectrum", "eigenvalues must be sorted in descending order");
    }
    return Spectrum{std::move(values)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Min-max normalized eigenvalue statistics of finite-mean Gaussian symmetric matrices";

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<DegenerateSpectrumError>(m, "DegenerateSpectrumError", PyExc_ArithmeticError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<CouplingParams>(m, "CouplingParams")
        .def(py::init([](double j0, double j1, int n) {
                 CouplingParams cp{j0, j1, n};
                 cp.validate();
                 return cp;
             }),
             py::arg("j0"), py::arg("j1"), py::arg("n"))
        .def_readonly("j0", &CouplingParams::j0)
        .def_readonly("j1", &CouplingParams::j1)
        .def_readonly("n", &CouplingParams::n)
        .def_property_readonly("ratio", &CouplingParams::ratio)
        .def("__repr__", [](const CouplingParams& cp) {
            return "CouplingParams(j0=" + format_double(cp.j0) + ", j1=" + format_double(cp.j1) +
                   ", n=" + std::to_string(cp.n) + ")";
        });

    py::class_<RawParams>(m, "RawParams")
        .def_readonly("mu", &RawParams::mu)
        .def_readonly("sigma", &RawParams::sigma)
        .def_readonly("n", &RawParams::n);

    py::enum_<Regime>(m, "Regime")
        .value("BulkSeparated", Regime::BulkSeparated)
        .value("BulkDominated", Regime::BulkDominated);

    py::class_<TheoryModel>(m, "TheoryModel")
        .def(py::init(&TheoryModel::from), py::arg("params"))
        .def_readonly("params", &TheoryModel::params)
        .def_readonly("regime", &TheoryModel::regime)
        .def_readonly("r", &TheoryModel::r);

    py::class_<TruncationReport>(m, "TruncationReport")
        .def_readonly("alpha", &TruncationReport::alpha)
        .def_readonly("kept_count", &TruncationReport::kept_count)
        .def_readonly("raw_error", &TruncationReport::raw_error)
        .def_readonly("normalized_error", &TruncationReport::normalized_error);

    // ensemble
    m.def("params_from_couplings", &params_from_couplings, py::arg("params"));
    m.def(
        "sample_matrix",
        [](const CouplingParams& cp, std::uint64_t seed, std::uint64_t set_index, std::uint64_t trial) {
            RngStream stream(seed, set_index, trial);
            return sample_matrix(params_from_couplings(cp), stream).entries();
        },
        py::arg("params"), py::arg("seed") = 42, py::arg("set_index") = 0, py::arg("trial") = 0,
        "Seeded draw; a pure function of (params, seed, set_index, trial).");
    m.def(
        "spectrum", [](const Eigen::MatrixXd& q) { return spectrum(SymmetricMatrix(q)).values; }, py::arg("matrix"),
        "Eigenvalues in descending order. The matrix must be exactly symmetric.");
    m.def(
        "normalize", [](std::vector<double> values) { return normalize(as_spectrum(std::move(values))).values; },
        py::arg("spectrum"));
    m.def(
        "expected_extremes",
        [](const CouplingParams& cp) {
            const auto e = expected_extremes(cp);
            return py::make_tuple(e.lam1, e.lam2, e.lam_n);
        },
        py::arg("params"));

    // theory
    m.def("r_value", &r_value, py::arg("j0"), py::arg("j1"));
    m.def("semicircle_cdf_component", &semicircle_cdf_component, py::arg("x"), py::arg("r"));
    m.def("cdf_finite", py::vectorize([](double x, TheoryModel tm) { return cdf_finite(x, tm); }),
          py::arg("x"), py::arg("model"));
    m.def("cdf_asymptotic", py::vectorize(&cdf_asymptotic), py::arg("x"), py::arg("j0"), py::arg("j1"));
    m.def("g_function", &g_function, py::arg("x"));
    m.def("coupling_error_theory_finite", &coupling_error_theory_finite, py::arg("alpha"), py::arg("model"));
    m.def("coupling_error_theory_asymptotic", &coupling_error_theory_asymptotic, py::arg("alpha"), py::arg("j0"),
          py::arg("j1"));

    // factorization
    m.def(
        "shifted_matrix",
        [](const Eigen::MatrixXd& q, double lam_n) { return shifted_matrix(SymmetricMatrix(q), lam_n).entries(); },
        py::arg("matrix"), py::arg("lam_n"));
    m.def(
        "low_rank_factor",
        [](const Eigen::MatrixXd& q, int k, std::optional<double> shift) {
            const SymmetricMatrix sym(q);
            return shift ? low_rank_factor(sym, k, *shift).v : low_rank_factor(sym, k).v;
        },
        py::arg("matrix"), py::arg("k"), py::arg("shift") = py::none(),
        "Factor V (n x k) with V V^T ~ Q - shift I; shift defaults to the smallest eigenvalue.");
    m.def(
        "frobenius_residual",
        [](const Eigen::MatrixXd& q, double lam_n, const Eigen::MatrixXd& v) {
            LowRankFactor f{v, static_cast<int>(v.cols()), lam_n};
            return frobenius_residual(SymmetricMatrix(q), lam_n, f);
        },
        py::arg("matrix"), py::arg("lam_n"), py::arg("factor"));
    m.def(
        "coupling_error_rank",
        [](std::vector<double> values, int k) { return coupling_error_rank(as_spectrum(std::move(values)), k); },
        py::arg("spectrum"), py::arg("k"));
    m.def(
        "coupling_error_threshold",
        [](std::vector<double> values, double alpha, const CouplingParams& cp) {
            return coupling_error_threshold(as_spectrum(std::move(values)), alpha, cp);
        },
        py::arg("spectrum"), py::arg("alpha"), py::arg("params"));

    // experiments
    m.def(
        "ecdf",
        [](const std::vector<double>& samples, const std::vector<double>& grid) {
            const auto e = ecdf(samples, grid);
            return py::make_tuple(e.values, e.sample_count);
        },
        py::arg("samples"), py::arg("grid"), "Returns (values, sample_count) with P(X < x) on the grid.");
    m.def(
        "run_experiment",
        [](const std::string& kind, std::uint64_t seed, std::optional<int> trials, int threads,
           std::optional<std::string> out) {
            ExperimentConfig cfg = ExperimentConfig::defaults(parse_experiment_kind(kind));
            cfg.master_seed = seed;
            if (trials) cfg.trials = *trials;
            cfg.threads = threads;
            ExperimentRun run;
            {
                py::gil_scoped_release release;
                run = run_experiment(cfg);
            }
            if (out) write_artifacts(run, *out);
            py::dict files;
            for (const auto& [name, content] : render_artifacts(run)) files[py::str(name)] = content;
            return py::make_tuple(run.passed, files);
        },
        py::arg("kind"), py::arg("seed") = 42, py::arg("trials") = py::none(), py::arg("threads") = 0,
        py::arg("out") = py::none(), "Runs a default experiment; returns (passed, {file name: contents}).");
    m.def(
        "verify",
        [](bool fast, std::uint64_t seed, int threads) {
            VerifyOptions options;
            options.fast = fast;
            options.seed = seed;
            options.threads = threads;
            VerifyReport report;
            {
                py::gil_scoped_release release;
                report = run_verify(options);
            }
            return py::make_tuple(report.passed(), render_report_table(report));
        },
        py::arg("fast") = true, py::arg("seed") = 42, py::arg("threads") = 0);
}
