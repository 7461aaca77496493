"""ABM and LM exponential dispersion models for count data."""

from ._core import (
    Baseline,
    EdmError,
    Family,
    FitResult,
    FrequencyTable,
    GofReport,
    MeasureAlgorithm,
    ModelSpec,
    baseline_pmf,
    conv_exponential,
    cumulant,
    evaluate_gof,
    excess_kurtosis,
    fit_baseline,
    fit_mle,
    fit_moments,
    g_func,
    gamma_q,
    goodness_of_fit,
    hermite_nu,
    log_measure,
    mean_domain,
    nu_measure,
    phi,
    pmf,
    psi,
    run_cli,
    skewness,
    total_mass,
    variance,
    zero_prob,
)

__all__ = [name for name in dir() if not name.startswith("_")]
