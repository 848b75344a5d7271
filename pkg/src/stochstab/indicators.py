"""Model-based transient growth indicators.

``alpha`` bounds the mean log growth rate of a finite perturbation:
the drift measure plus, per diffusion channel, a curvature term and a
directional product term.  ``beta`` bounds the per-time variance of log
growth through the squared channel measures.  Both are assembled from the
growth estimators in `lognorm` over the model's domain box (or over a
trajectory tube).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lognorm import MapUnderTest, SamplingBudget, mu_p, mu_p_prime
from .norms import (
    NORM_FLOOR,
    NormFloorError,
    UnsupportedOrderError,
    WeightedNormSpec,
    ZeroComponentError,
    log_norm_gradient,
    weighted_p_norm,
)
from .sde import CoupledTrajectory, SdeModel


@dataclass(frozen=True)
class ChannelTerms:
    """Growth measures of one diffusion channel map."""

    mu_prime: float
    mu_plus: float   # mu_p(b_j)
    mu_minus: float  # mu_p(-b_j)

    @property
    def beta_term(self) -> float:
        # The variance bound needs the dominant directional magnitude,
        # which is sign-symmetric in the channel.
        return max(self.mu_plus, self.mu_minus) ** 2


@dataclass(frozen=True)
class AlphaBetaReport:
    alpha: float
    beta: float
    mu_drift: float
    channels: tuple
    p: float
    budget: SamplingBudget
    label: str = ""

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "p": self.p,
            "alpha": self.alpha,
            "beta": self.beta,
            "mu_drift": self.mu_drift,
            "channels": [
                {
                    "mu_prime": c.mu_prime,
                    "mu_plus": c.mu_plus,
                    "mu_minus": c.mu_minus,
                }
                for c in self.channels
            ],
            "budget": {
                "base_points": self.budget.base_points,
                "directions": self.budget.directions,
                "h_sequence": list(self.budget.h_sequence),
                "seed": self.budget.seed,
            },
        }


def _domain(model: SdeModel, domain) -> tuple[np.ndarray, np.ndarray]:
    if domain is None:
        return model.lower, model.upper
    lo, hi = domain
    return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)


def _field_map(fn, affine, lower, upper, at_time, vectorized, delegate, name):
    matrix = offset = None
    if delegate and affine is not None:
        matrix, offset = affine
    return MapUnderTest(
        evaluator=lambda x: fn(x, at_time),
        lower=lower,
        upper=upper,
        matrix=matrix,
        offset=offset,
        vectorized=vectorized,
        name=name,
    )


def alpha_beta(
    model: SdeModel,
    spec: WeightedNormSpec | None = None,
    budget: SamplingBudget | None = None,
    at_time: float = 0.0,
    domain=None,
    delegate: bool = True,
) -> AlphaBetaReport:
    """Assemble the full growth report for a model.

    ``domain`` optionally overrides the model's box (e.g. a trajectory
    tube).  ``delegate=False`` forces the sampling estimator even for
    affine-declared fields.
    """
    if spec is None:
        spec = WeightedNormSpec.ones(model.n)
    if budget is None:
        budget = SamplingBudget()
    if model.m > 0 and spec.p != 2.0:
        raise UnsupportedOrderError(
            "diffusion channel terms require p = 2 (second-order path)"
        )
    lo, hi = _domain(model, domain)

    drift_map = _field_map(
        model.drift, model.drift_affine, lo, hi, at_time, model.vectorized,
        delegate, f"{model.label}:drift",
    )
    mu_drift = mu_p(drift_map, spec, budget)

    channels = []
    diff_affine = model.diffusion_affine or (None,) * model.m
    for j, b in enumerate(model.diffusion):
        ch_map = _field_map(
            b, diff_affine[j], lo, hi, at_time, model.vectorized,
            delegate, f"{model.label}:b{j}",
        )
        channels.append(
            ChannelTerms(
                mu_prime=mu_p_prime(ch_map, spec, budget),
                mu_plus=mu_p(ch_map, spec, budget),
                mu_minus=mu_p(ch_map.negated(), spec, budget),
            )
        )

    alpha_val = mu_drift + sum(
        c.mu_prime + (spec.p / 2.0) * c.mu_minus * c.mu_plus for c in channels
    )
    beta_val = sum(c.beta_term for c in channels)
    return AlphaBetaReport(
        alpha=float(alpha_val),
        beta=float(beta_val),
        mu_drift=float(mu_drift),
        channels=tuple(channels),
        p=spec.p,
        budget=budget,
        label=model.label,
    )


def alpha(model, spec=None, budget=None, **kwargs) -> AlphaBetaReport:
    """Growth report; the headline number is the ``alpha`` field."""
    return alpha_beta(model, spec, budget, **kwargs)


def beta(model, spec=None, budget=None, **kwargs) -> float:
    """Diffusion variability coefficient (sum of squared channel measures)."""
    return alpha_beta(model, spec, budget, **kwargs).beta


@dataclass(frozen=True)
class SufficiencyResult:
    satisfied: bool
    margin: float
    diffusion_free_lhs: float | None = None


def check_sufficient_condition(report: AlphaBetaReport) -> SufficiencyResult:
    """Non-positive mean growth certificate: satisfied iff alpha <= 0.

    When every channel measure vanishes (beta = 0) the report also carries
    the diffusion-free reduction mu(f) + sum mu'(b_j).
    """
    diffusion_free = None
    if report.beta == 0.0:
        diffusion_free = report.mu_drift + sum(c.mu_prime for c in report.channels)
    return SufficiencyResult(
        satisfied=report.alpha <= 0.0,
        margin=-report.alpha,
        diffusion_free_lhs=diffusion_free,
    )


@dataclass(frozen=True)
class P1LocalResult:
    lhs: float
    satisfied: bool


def p1_local_condition(
    model: SdeModel,
    spec: WeightedNormSpec,
    x,
    delta,
    at_time: float = 0.0,
) -> P1LocalResult:
    """Exact local p=1 growth balance at one (x, delta) pair.

    Evaluates g . df - 1/2 sum_j (g . db_j)^2 with the p=1 log-norm
    gradient; non-positive iff the perturbation does not grow in the mean
    at this point.  No supremum is taken.
    """
    if spec.p != 1.0:
        raise UnsupportedOrderError("local condition is specific to p = 1")
    x = np.asarray(x, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if np.any(spec.to_weighted(delta) == 0.0):
        raise ZeroComponentError(
            "p=1 local condition needs componentwise nonzero perturbations"
        )
    g = log_norm_gradient(delta, spec)
    t = at_time
    df = spec.to_weighted(
        np.asarray(model.drift(x + delta, t), dtype=float)
        - np.asarray(model.drift(x, t), dtype=float)
    )
    lhs = float(g @ df)
    for b in model.diffusion:
        db = spec.to_weighted(
            np.asarray(b(x + delta, t), dtype=float)
            - np.asarray(b(x, t), dtype=float)
        )
        lhs -= 0.5 * float(g @ db) ** 2
    return P1LocalResult(lhs=lhs, satisfied=lhs <= 0.0)


def empirical_log_growth(traj: CoupledTrajectory, spec: WeightedNormSpec) -> np.ndarray:
    """Per-step increments of ln ||W dX||_p along a coupled trajectory."""
    deltas = traj.delta
    logs = np.empty(len(deltas))
    for k, d in enumerate(deltas):
        r = weighted_p_norm(d, spec)
        if not r > NORM_FLOOR:
            raise NormFloorError(f"perturbation norm below floor at step {k}")
        logs[k] = np.log(r)
    return np.diff(logs)


def trajectory_tube_domain(
    traj: CoupledTrajectory, inflate: float = 0.1
) -> tuple[np.ndarray, np.ndarray]:
    """Bounding box of a simulated trajectory, inflated for use as a domain."""
    pts = np.vstack([traj.base, traj.perturbed])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    pad = inflate * np.maximum(hi - lo, 1e-9)
    return lo - pad, hi + pad
