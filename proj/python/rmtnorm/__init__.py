"""Min-max normalized eigenvalue statistics of finite-mean Gaussian symmetric matrices."""

from ._core import (
    CouplingParams,
    DegenerateSpectrumError,
    DomainError,
    NumericalError,
    ParameterError,
    RawParams,
    Regime,
    TheoryModel,
    TruncationReport,
    cdf_asymptotic,
    cdf_finite,
    coupling_error_rank,
    coupling_error_theory_asymptotic,
    coupling_error_theory_finite,
    coupling_error_threshold,
    ecdf,
    expected_extremes,
    frobenius_residual,
    g_function,
    low_rank_factor,
    normalize,
    params_from_couplings,
    r_value,
    run_experiment,
    sample_matrix,
    semicircle_cdf_component,
    shifted_matrix,
    spectrum,
    verify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
