"""Weighted p-norms on heterogeneous state vectors.

States mixing physical units (position, velocity, ...) are rescaled by a
diagonal positive weight vector before any norm is taken, which makes every
downstream growth-rate formula dimensionless.  The gradient and Hessian of
``ln ||W dx||_p`` are the core kernels used by every growth estimator in
this package; both are returned in weighted coordinates ``y = W dx``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Below this weighted norm, log-norm quantities are refused rather than
# returned as +/- inf.
NORM_FLOOR = 1e-12


class DimensionMismatchError(ValueError):
    """Vector length does not match the weight specification."""


class NormFloorError(ValueError):
    """Weighted norm at or below the floor; logarithmic quantities undefined."""


class ZeroComponentError(ValueError):
    """A formula singular at zero components was evaluated on one (p < 2)."""


class UnsupportedOrderError(ValueError):
    """Norm order p outside the range the operation supports."""


@dataclass(frozen=True)
class WeightedNormSpec:
    """Diagonal weight vector plus norm order p.

    weights: one strictly positive scalar per state component (units
        1/[component unit], so weighted states are dimensionless).
    p: norm order >= 1.  Default 2, the only order for which the full
        second-order stochastic analysis is exact.
    """

    weights: np.ndarray
    p: float = 2.0

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d vector")
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise ValueError("every weight must be finite and strictly positive")
        if not (self.p >= 1.0):
            raise ValueError(f"norm order p must be >= 1, got {self.p}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "p", float(self.p))

    @property
    def n(self) -> int:
        return self.weights.size

    @classmethod
    def ones(cls, n: int, p: float = 2.0) -> "WeightedNormSpec":
        """All-ones weights (the default when a model supplies none)."""
        return cls(np.ones(n), p)

    def to_weighted(self, x) -> np.ndarray:
        """Map a state-space vector (or batch of rows) to weighted coordinates."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise DimensionMismatchError(
                f"vector has dimension {x.shape[-1]}, spec expects {self.n}"
            )
        return x * self.weights

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "p": self.p}

    @classmethod
    def from_dict(cls, d: dict) -> "WeightedNormSpec":
        return cls(np.asarray(d["weights"], dtype=float), float(d.get("p", 2.0)))


@dataclass(frozen=True)
class Perturbation:
    """A finite state perturbation with its timestamp.

    ``delta`` is in raw state units (pre-weighting); ``dt`` records the
    sampling interval that produced it when it came from telemetry.
    """

    delta: np.ndarray
    t: float
    dt: float = float("nan")

    def __post_init__(self):
        object.__setattr__(self, "delta", np.asarray(self.delta, dtype=float))

    def weighted_norm(self, spec: WeightedNormSpec) -> float:
        return weighted_p_norm(self.delta, spec)


def _pnorm(y: np.ndarray, p: float) -> float:
    """p-norm of an already-weighted vector."""
    if np.isinf(p):
        return float(np.max(np.abs(y))) if y.size else 0.0
    if p == 2.0:
        return float(np.linalg.norm(y))
    if p == 1.0:
        return float(np.sum(np.abs(y)))
    return float(np.sum(np.abs(y) ** p) ** (1.0 / p))


def weighted_p_norm(x, spec: WeightedNormSpec) -> float:
    """||W x||_p.  Zero iff x = 0."""
    y = spec.to_weighted(x)
    return _pnorm(y, spec.p)


def _checked_weighted(delta, spec: WeightedNormSpec) -> tuple[np.ndarray, float]:
    y = spec.to_weighted(delta)
    r = _pnorm(y, spec.p)
    if not r > NORM_FLOOR:
        raise NormFloorError(
            f"weighted norm {r:.3e} is at or below the floor {NORM_FLOOR:.0e}"
        )
    return y, r


def log_norm_gradient(delta, spec: WeightedNormSpec) -> np.ndarray:
    """Gradient of ln ||y||_p at y = W delta, in weighted coordinates.

    Componentwise y_i |y_i|^(p-2) / ||y||_p^p.  Satisfies g . y = 1 (Euler
    identity for the degree-zero homogeneous log-norm).  sign(0) is taken
    as 0, the subgradient convention for p = 1.
    """
    if np.isinf(spec.p):
        raise UnsupportedOrderError("gradient formula requires finite p")
    y, r = _checked_weighted(delta, spec)
    p = spec.p
    if p == 2.0:
        return y / (r * r)
    # sign(y)*|y|^(p-1) stays finite for every p >= 1, including at zeros.
    return np.sign(y) * np.abs(y) ** (p - 1.0) / r**p


def log_norm_hessian(delta, spec: WeightedNormSpec) -> np.ndarray:
    """Hessian of ln ||y||_p at y = W delta, in weighted coordinates.

    Compact form (p-1) diag(|y|^(p-2)) / ||y||_p^p - p g g^T; symmetric by
    construction.  For p < 2 the diagonal term is singular at zero
    components, which are refused.
    """
    if np.isinf(spec.p):
        raise UnsupportedOrderError("Hessian formula requires finite p")
    y, r = _checked_weighted(delta, spec)
    p = spec.p
    if p < 2.0 and np.any(y == 0.0):
        raise ZeroComponentError(
            "Hessian is singular at zero components for p < 2"
        )
    if p == 2.0:
        g = y / (r * r)
        return np.eye(y.size) / (r * r) - 2.0 * np.outer(g, g)
    g = np.sign(y) * np.abs(y) ** (p - 1.0) / r**p
    diag = (p - 1.0) * np.abs(y) ** (p - 2.0) / r**p
    return np.diag(diag) - p * np.outer(g, g)
