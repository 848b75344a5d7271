"""Probabilistic bounds on finite-time transient growth.

Both bounds control P(Y >= 0) for the log-norm increment Y over a small
window dt, given the mean-rate coefficient alpha < 0 and the variance-rate
coefficient beta.  They are small-dt asymptotic statements: the cumulant
remainder is not modelled, and no composition across windows is attempted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sde import EnsembleSummary

SMALL_DT_CAVEAT = "small-dt asymptotic bound; o(dt) cumulant remainder not modelled"


class InvalidBoundError(ValueError):
    """Bound requested outside its derivation's validity region."""


class EmptyEnsembleError(ValueError):
    """Not enough Monte Carlo paths to estimate a frequency."""


@dataclass(frozen=True)
class GrowthProbabilityBound:
    """A bound on P(Y >= 0), clipped to [0, 1] with the raw value retained."""

    method: str
    alpha: float
    beta: float
    dt: float
    value: float
    raw: float
    zeta: float | None = None
    exact: bool = False
    note: str = SMALL_DT_CAVEAT

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "alpha": self.alpha,
            "beta": self.beta,
            "dt": self.dt,
            "value": self.value,
            "raw": self.raw,
            "zeta": self.zeta,
            "exact": self.exact,
            "note": self.note,
        }


def _validate(alpha: float, beta: float, dt: float):
    if dt <= 0:
        raise InvalidBoundError("dt must be positive")
    if beta < 0:
        raise InvalidBoundError("beta must be non-negative")


def chebyshev_growth_bound(alpha: float, beta: float, dt: float) -> GrowthProbabilityBound:
    """P(Y >= 0) <= beta / (alpha^2 dt).  Needs strictly negative alpha.

    Inversely proportional to dt, hence uninformative as dt -> 0.
    """
    _validate(alpha, beta, dt)
    if alpha >= 0:
        raise InvalidBoundError("Chebyshev growth bound requires alpha < 0")
    raw = beta / (alpha * alpha * dt)
    return GrowthProbabilityBound(
        method="chebyshev",
        alpha=alpha,
        beta=beta,
        dt=dt,
        value=min(1.0, raw),
        raw=raw,
    )


def chernoff_growth_bound(alpha: float, beta: float, dt: float) -> GrowthProbabilityBound:
    """P(Y >= 0) <= exp(-alpha^2 dt / (2 beta)) at the optimal exponent.

    The optimal tilt is zeta = -alpha/beta.  beta = 0 with alpha < 0 is
    deterministic contraction: the probability is exactly 0 and returned as
    a distinguished exact case.
    """
    _validate(alpha, beta, dt)
    if alpha > 0:
        raise InvalidBoundError("Chernoff growth bound requires alpha <= 0")
    if beta == 0.0:
        value = 0.0 if alpha < 0 else 1.0
        return GrowthProbabilityBound(
            method="chernoff",
            alpha=alpha,
            beta=beta,
            dt=dt,
            value=value,
            raw=value,
            zeta=None,
            exact=True,
            note="degenerate increment (beta = 0); probability is exact",
        )
    zeta = -alpha / beta
    raw = math.exp(-(alpha * alpha) * dt / (2.0 * beta))
    return GrowthProbabilityBound(
        method="chernoff",
        alpha=alpha,
        beta=beta,
        dt=dt,
        value=min(1.0, raw),
        raw=raw,
        zeta=zeta,
    )


def gaussian_growth_probability(alpha: float, beta: float, dt: float) -> float:
    """P(Y >= 0) for the small-dt limiting law Y ~ Normal(alpha dt, beta dt).

    Equals Phi(alpha sqrt(dt/beta)); the closed-form oracle that the
    Chernoff bound dominates analytically.
    """
    _validate(alpha, beta, dt)
    if beta == 0.0:
        return 0.0 if alpha < 0 else 1.0
    z = alpha * math.sqrt(dt / beta)
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


@dataclass(frozen=True)
class FrequencyEstimate:
    frequency: float
    n: int
    se: float


def empirical_growth_probability(
    ensemble: EnsembleSummary, step: int
) -> FrequencyEstimate:
    """Fraction of surviving paths with Y_step >= 0, with binomial SE."""
    hits, n = ensemble.nonneg_counts(step)
    if n < 100:
        raise EmptyEnsembleError(
            f"need at least 100 surviving paths for a frequency, got {n}"
        )
    p_hat = hits / n
    se = math.sqrt(p_hat * (1.0 - p_hat) / n)
    return FrequencyEstimate(frequency=p_hat, n=n, se=se)


def bounds_from_report(report, dt: float) -> dict:
    """Both growth bounds driven by a model-derived indicator report.

    Companion to the raw-coefficient entry points for screening workflows
    that start from an `AlphaBetaReport` instead of hand-supplied rates.
    """
    out = {"chernoff": chernoff_growth_bound(report.alpha, report.beta, dt)}
    try:
        out["chebyshev"] = chebyshev_growth_bound(report.alpha, report.beta, dt)
    except InvalidBoundError:
        out["chebyshev"] = None
    return out


def window_growth_frequency(ensemble: EnsembleSummary) -> FrequencyEstimate:
    """Fraction of surviving paths whose total increment over the horizon
    is non-negative (one Y over the whole simulated window)."""
    rows = ensemble.log_increments[ensemble.valid_mask]
    n = rows.shape[0]
    if n < 100:
        raise EmptyEnsembleError(
            f"need at least 100 surviving paths for a frequency, got {n}"
        )
    totals = rows.sum(axis=1)
    p_hat = float(np.mean(totals >= 0.0))
    se = math.sqrt(p_hat * (1.0 - p_hat) / n)
    return FrequencyEstimate(frequency=p_hat, n=n, se=se)
