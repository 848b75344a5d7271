"""Finite-time transient stability analysis of stochastic systems.

Logarithmic-norm growth indicators (alpha, beta) for Ito SDE models,
probabilistic transient-instability bounds, coupled-path Monte Carlo,
projected/data-injected dynamics, and telemetry diagnostics.
"""

from .norms import (
    NORM_FLOOR,
    Perturbation,
    WeightedNormSpec,
    log_norm_gradient,
    log_norm_hessian,
    weighted_p_norm,
)
from .lognorm import (
    MapUnderTest,
    SamplingBudget,
    check_key_bound,
    matrix_measure,
    matrix_second_order_measure,
    mu_p,
    mu_p_prime,
)
from .sde import (
    CoupledTrajectory,
    EnsembleSummary,
    SdeModel,
    simulate_coupled,
    simulate_ensemble,
)
from .indicators import (
    AlphaBetaReport,
    alpha,
    alpha_beta,
    beta,
    check_sufficient_condition,
    empirical_log_growth,
    p1_local_condition,
)
from .bounds import (
    GrowthProbabilityBound,
    bounds_from_report,
    chebyshev_growth_bound,
    chernoff_growth_bound,
    empirical_growth_probability,
    gaussian_growth_probability,
)
from .projected import (
    ProjectionSpec,
    build_projected_model,
    data_injection_operator,
    projected_alpha_beta,
    projection_operator,
)
from .telemetry import (
    IndicatorSeries,
    StateSeries,
    analyze_series,
    incremental_perturbations,
    indicator_series,
    load_telemetry,
)

__version__ = "0.1.0"

__all__ = [
    "NORM_FLOOR",
    "Perturbation",
    "WeightedNormSpec",
    "weighted_p_norm",
    "log_norm_gradient",
    "log_norm_hessian",
    "MapUnderTest",
    "SamplingBudget",
    "matrix_measure",
    "matrix_second_order_measure",
    "mu_p",
    "mu_p_prime",
    "check_key_bound",
    "SdeModel",
    "CoupledTrajectory",
    "EnsembleSummary",
    "simulate_coupled",
    "simulate_ensemble",
    "AlphaBetaReport",
    "alpha",
    "alpha_beta",
    "beta",
    "check_sufficient_condition",
    "p1_local_condition",
    "empirical_log_growth",
    "GrowthProbabilityBound",
    "bounds_from_report",
    "chebyshev_growth_bound",
    "chernoff_growth_bound",
    "gaussian_growth_probability",
    "empirical_growth_probability",
    "ProjectionSpec",
    "projection_operator",
    "data_injection_operator",
    "build_projected_model",
    "projected_alpha_beta",
    "StateSeries",
    "IndicatorSeries",
    "load_telemetry",
    "incremental_perturbations",
    "indicator_series",
    "analyze_series",
    "__version__",
]
