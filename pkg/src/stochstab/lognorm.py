"""Logarithmic norms of linear and nonlinear Lipschitz maps.

For a linear operator the logarithmic norm has closed forms for
p in {1, 2, inf}; for general Lipschitz maps this module estimates it by
sampling finite difference growth quotients over the map's domain.  Every
sampled estimate is a lower bound of the true supremum: it can only grow
as the sampling budget grows, and it is deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .norms import (
    NormFloorError,
    UnsupportedOrderError,
    WeightedNormSpec,
    _pnorm,
    log_norm_hessian,
)


class EmptyDomainError(ValueError):
    """Domain box is empty or admits no valid perturbation samples."""


class EvaluatorError(RuntimeError):
    """The map under test failed or returned non-finite values."""


def _as_box(lower, upper) -> tuple[np.ndarray, np.ndarray]:
    lo = np.atleast_1d(np.asarray(lower, dtype=float))
    hi = np.atleast_1d(np.asarray(upper, dtype=float))
    if lo.shape != hi.shape or lo.ndim != 1:
        raise ValueError("domain bounds must be 1-d vectors of equal length")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("domain bounds must be finite")
    if np.any(hi < lo):
        raise EmptyDomainError("domain box is empty (upper < lower)")
    return lo, hi


@dataclass(frozen=True)
class MapUnderTest:
    """A map phi: R^n -> R^n restricted to an axis-aligned box.

    If ``matrix`` (and optionally ``offset``) is given, the map is declared
    affine, phi(x) = A x + c; closed forms are then used where available.
    The declaration is spot-checked against the evaluator on construction.
    ``vectorized`` promises the evaluator accepts (S, n) batches of rows.
    """

    evaluator: object
    lower: np.ndarray
    upper: np.ndarray
    matrix: np.ndarray | None = None
    offset: np.ndarray | None = None
    vectorized: bool = False
    name: str = ""

    def __post_init__(self):
        lo, hi = _as_box(self.lower, self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if self.matrix is not None:
            A = np.asarray(self.matrix, dtype=float)
            if A.shape != (self.n, self.n):
                raise ValueError("declared matrix shape does not match the domain")
            object.__setattr__(self, "matrix", A)
            c = (
                np.zeros(self.n)
                if self.offset is None
                else np.asarray(self.offset, dtype=float)
            )
            object.__setattr__(self, "offset", c)
            self._check_affine_declaration(A, c)

    @property
    def n(self) -> int:
        return self.lower.size

    def _check_affine_declaration(self, A, c):
        pts = np.vstack([self.lower, self.upper, 0.5 * (self.lower + self.upper)])
        got = _eval_map(self, pts)
        want = pts @ A.T + c
        err = np.max(np.abs(got - want))
        if err > 1e-10 * (1.0 + np.max(np.abs(want))):
            raise ValueError(
                f"evaluator disagrees with declared affine form (max err {err:.3e})"
            )

    @classmethod
    def from_matrix(cls, A, lower, upper, offset=None, name="") -> "MapUnderTest":
        A = np.asarray(A, dtype=float)
        c = np.zeros(A.shape[0]) if offset is None else np.asarray(offset, float)
        return cls(
            evaluator=lambda x: np.asarray(x) @ A.T + c,
            lower=lower,
            upper=upper,
            matrix=A,
            offset=c,
            vectorized=True,
            name=name,
        )

    def negated(self) -> "MapUnderTest":
        ev = self.evaluator
        return MapUnderTest(
            evaluator=lambda x: -np.asarray(ev(x)),
            lower=self.lower,
            upper=self.upper,
            matrix=None if self.matrix is None else -self.matrix,
            offset=None if self.offset is None else -self.offset,
            vectorized=self.vectorized,
            name=f"-({self.name})" if self.name else "",
        )


@dataclass(frozen=True)
class SamplingBudget:
    """Sampling effort for the growth-quotient estimators.

    ``h_sequence`` holds perturbation radii relative to the weighted domain
    diameter, evaluated largest to smallest so the running maximum exposes
    the small-h (upper Dini) behaviour.  ``max_radius`` optionally caps the
    absolute weighted perturbation radius, restricting the estimate to
    application-relevant perturbation magnitudes.
    """

    base_points: int = 128
    directions: int = 64
    h_sequence: tuple = (1e-2, 1e-3, 1e-4, 1e-5)
    seed: int = 0
    max_radius: float | None = None

    def __post_init__(self):
        if self.base_points < 1 or self.directions < 1:
            raise ValueError("base_points and directions must be positive")
        hs = tuple(float(h) for h in self.h_sequence)
        if not hs or any(h <= 0 for h in hs):
            raise ValueError("h_sequence must contain positive values")
        if any(b >= a for a, b in zip(hs, hs[1:])):
            raise ValueError("h_sequence must be strictly decreasing")
        if hs[-1] < 1e-8:
            raise ValueError("smallest relative h must be >= 1e-8")
        object.__setattr__(self, "h_sequence", hs)

    @property
    def size(self) -> int:
        return self.base_points * self.directions


def _eval_map(m: MapUnderTest, pts: np.ndarray) -> np.ndarray:
    """Evaluate the map on (S, n) rows, batching when the map allows it."""
    try:
        if m.vectorized:
            out = np.asarray(m.evaluator(pts), dtype=float)
        else:
            out = np.stack([np.asarray(m.evaluator(p), dtype=float) for p in pts])
    except Exception as exc:  # noqa: BLE001 - reported with context
        raise EvaluatorError(f"map evaluation failed: {exc}") from exc
    if out.shape != pts.shape:
        raise EvaluatorError(
            f"map returned shape {out.shape}, expected {pts.shape}"
        )
    if not np.all(np.isfinite(out)):
        raise EvaluatorError("map returned non-finite values on the domain")
    return out


def matrix_measure(A, spec: WeightedNormSpec) -> float:
    """Classical matrix measure of A under the weighted p-norm.

    p=2: largest eigenvalue of the symmetric part of Abar = W A W^-1.
    p=1: max over columns j of Abar_jj + sum_{i != j} |Abar_ij|.
    p=inf: same over rows.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix_measure needs a square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    w = spec.weights
    if A.shape[0] != w.size:
        raise ValueError("matrix dimension does not match the norm spec")
    Abar = (w[:, None] * A) / w[None, :]
    p = spec.p
    if p == 2.0:
        return float(np.linalg.eigvalsh(0.5 * (Abar + Abar.T))[-1])
    if p == 1.0:
        off = np.sum(np.abs(Abar), axis=0) - np.abs(np.diag(Abar))
        return float(np.max(np.diag(Abar) + off))
    if np.isinf(p):
        off = np.sum(np.abs(Abar), axis=1) - np.abs(np.diag(Abar))
        return float(np.max(np.diag(Abar) + off))
    raise UnsupportedOrderError(
        f"matrix measure has closed form only for p in {{1, 2, inf}}, got {p}"
    )


def matrix_second_order_measure(A, spec: WeightedNormSpec) -> float:
    """Closed form of the second-order measure for an affine map.

    For p=2 the supremum of the curvature quadratic form over directions is
    attained at the top right-singular vector of Abar, giving smax^2 / 2.
    For p=1 it vanishes identically.
    """
    p = spec.p
    if p == 1.0:
        return 0.0
    if p != 2.0:
        raise UnsupportedOrderError(
            "second-order measure closed form exists only for p in {1, 2}"
        )
    A = np.asarray(A, dtype=float)
    w = spec.weights
    Abar = (w[:, None] * A) / w[None, :]
    smax = np.linalg.svd(Abar, compute_uv=False)[0]
    return float(0.5 * smax * smax)


@dataclass
class _Samples:
    """Per-sample quantities shared by all estimators (weighted coordinates)."""

    y: np.ndarray          # (S, n) weighted perturbations
    dphi: np.ndarray       # (S, n) weighted map increments
    radius: np.ndarray     # (S,)   ||y||_p
    quotient: np.ndarray   # (S,)   g(y) . dphi
    curvature: np.ndarray  # (S,)   (p-1)/2 sum |y|^(p-2) dphi^2 / r^p
    ratio: np.ndarray      # (S,)   ||dphi||_p / ||y||_p

    @property
    def count(self) -> int:
        return self.quotient.size


def _unit_rows(z: np.ndarray, p: float) -> np.ndarray:
    if np.isinf(p):
        nrm = np.max(np.abs(z), axis=1)
    elif p == 2.0:
        nrm = np.linalg.norm(z, axis=1)
    elif p == 1.0:
        nrm = np.sum(np.abs(z), axis=1)
    else:
        nrm = np.sum(np.abs(z) ** p, axis=1) ** (1.0 / p)
    keep = nrm > 0
    return z[keep] / nrm[keep, None]


def _fd_jacobian_weighted(m: MapUnderTest, spec, x: np.ndarray, step: float):
    """Central-difference Jacobian of the weighted map at x, clipped to the box.

    Used only to propose high-growth directions; the proposals are then
    scored as ordinary finite-difference samples.
    """
    n = m.n
    w = spec.weights
    hi_pts = np.empty((n, n))
    lo_pts = np.empty((n, n))
    for l in range(n):
        dx = step / w[l]
        hi = x.copy()
        lo = x.copy()
        hi[l] = min(x[l] + dx, m.upper[l])
        lo[l] = max(x[l] - dx, m.lower[l])
        hi_pts[l] = hi
        lo_pts[l] = lo
    f_hi = _eval_map(m, hi_pts)
    f_lo = _eval_map(m, lo_pts)
    J = np.zeros((n, n))
    for l in range(n):
        denom = (hi_pts[l, l] - lo_pts[l, l]) * w[l]
        if denom > 0:
            J[:, l] = w * (f_hi[l] - f_lo[l]) / denom
    return J


def _proposal_directions(m: MapUnderTest, spec, x: np.ndarray, step: float):
    """Eigen/singular directions of the local FD Jacobian (weighted coords)."""
    try:
        J = _fd_jacobian_weighted(m, spec, x, step)
    except EvaluatorError:
        return np.empty((0, m.n))
    if not np.all(np.isfinite(J)):
        return np.empty((0, m.n))
    sym = 0.5 * (J + J.T)
    _, vecs = np.linalg.eigh(sym)
    top = vecs[:, -1]
    _, _, vt = np.linalg.svd(J)
    return np.vstack([top, vt[0]])


def sample_growth_quotients(
    m: MapUnderTest,
    spec: WeightedNormSpec,
    budget: SamplingBudget,
    include_proposals: bool = True,
) -> _Samples:
    """Build the shared finite-difference sample set for a map.

    Directions live on the unit sphere of the weighted norm and always
    include the 2n axis directions (extremal for the non-Euclidean norms).
    When ``include_proposals`` is set and p = 2, the top eigen- and
    singular directions of a local finite-difference Jacobian are added at
    each base point; they sharpen the estimate for near-linear maps while
    remaining ordinary admissible samples.  Base points and directions are
    drawn from per-base-point seeded streams, so enlarging the budget only
    ever extends the sample set.
    """
    if np.isinf(spec.p):
        raise UnsupportedOrderError(
            "sampled estimators require finite p; use matrix_measure for p=inf"
        )
    lo, hi = m.lower, m.upper
    if lo.size != spec.n:
        raise ValueError("map dimension does not match the norm spec")
    p = spec.p
    w = spec.weights
    scale = _pnorm((hi - lo) * w, p)
    if scale == 0.0:
        raise EmptyDomainError("domain box has zero weighted diameter")
    n = m.n

    radii = np.array([h * scale for h in budget.h_sequence])
    if budget.max_radius is not None:
        radii = np.minimum(radii, budget.max_radius)
    radii = np.unique(radii)[::-1]

    base_rng = Generator(Philox(SeedSequence((budget.seed, 0))))
    bases = lo + base_rng.random((budget.base_points, n)) * (hi - lo)

    axes = np.vstack([np.eye(n), -np.eye(n)])
    prop_step = radii[-1]

    xs, ys = [], []
    for i, x in enumerate(bases):
        dir_rng = Generator(Philox(SeedSequence((budget.seed, 1, i))))
        dirs = _unit_rows(dir_rng.standard_normal((budget.directions, n)), p)
        dirs = np.vstack([dirs, axes])
        if include_proposals and p == 2.0:
            props = _unit_rows(_proposal_directions(m, spec, x, prop_step), p)
            if props.size:
                dirs = np.vstack([dirs, props])
        # (D, H, n) candidate weighted perturbations
        y_cand = dirs[:, None, :] * radii[None, :, None]
        x_cand = x[None, None, :] + y_cand / w
        ok = np.all((x_cand >= lo) & (x_cand <= hi), axis=2)
        if not np.any(ok):
            continue
        xs.append(np.broadcast_to(x, (int(ok.sum()), n)).copy())
        ys.append(y_cand[ok])
    if not xs:
        raise EmptyDomainError("no admissible perturbation samples in the box")

    x_all = np.vstack(xs)
    y_all = np.vstack(ys)
    phi_base = _eval_map(m, x_all)
    phi_pert = _eval_map(m, x_all + y_all / w)
    dphi = (phi_pert - phi_base) * w

    if p == 2.0:
        r = np.linalg.norm(y_all, axis=1)
        quot = np.einsum("ij,ij->i", y_all, dphi) / (r * r)
        curv = 0.5 * np.einsum("ij,ij->i", dphi, dphi) / (r * r)
        ratio = np.linalg.norm(dphi, axis=1) / r
    else:
        r = np.sum(np.abs(y_all) ** p, axis=1) ** (1.0 / p)
        grad = np.sign(y_all) * np.abs(y_all) ** (p - 1.0)
        quot = np.einsum("ij,ij->i", grad, dphi) / r**p
        if p == 1.0:
            curv = np.zeros_like(quot)
            ratio = np.sum(np.abs(dphi), axis=1) / r
        else:
            # The curvature form is singular at zero components for p < 2
            # and only consumed at p in {1, 2}; left undefined otherwise.
            curv = np.full_like(quot, np.nan)
            ratio = np.sum(np.abs(dphi) ** p, axis=1) ** (1.0 / p) / r
    return _Samples(y_all, dphi, r, quot, curv, ratio)


def mu_p(
    m: MapUnderTest,
    spec: WeightedNormSpec,
    budget: SamplingBudget,
    include_proposals: bool = True,
) -> float:
    """Logarithmic norm of the map: supremum of first-order growth quotients.

    Affine-declared maps delegate to the closed-form matrix measure for
    p in {1, 2, inf}.  Otherwise returns a sampled lower bound of the
    supremum, non-decreasing in the budget.
    """
    if m.matrix is not None and (spec.p in (1.0, 2.0) or np.isinf(spec.p)):
        return matrix_measure(m.matrix, spec)
    samples = sample_growth_quotients(m, spec, budget, include_proposals)
    return float(np.max(samples.quotient))


def mu_p_prime(
    m: MapUnderTest,
    spec: WeightedNormSpec,
    budget: SamplingBudget,
    include_proposals: bool = True,
) -> float:
    """Second-order (curvature) measure of the map.

    Exactly zero for p = 1, reflecting the piecewise-linear norm geometry.
    Restricted to p in {1, 2}: the curvature form is singular for other
    orders at zero components.
    """
    if spec.p == 1.0:
        return 0.0
    if spec.p != 2.0:
        raise UnsupportedOrderError("second-order measure supports p in {1, 2}")
    if m.matrix is not None:
        return matrix_second_order_measure(m.matrix, spec)
    samples = sample_growth_quotients(m, spec, budget, include_proposals)
    return float(np.max(samples.curvature))


def lipschitz_ratio_bounds(
    m: MapUnderTest,
    spec: WeightedNormSpec,
    budget: SamplingBudget,
    include_proposals: bool = True,
) -> tuple[float, float]:
    """Sampled (min, max) of ||dphi|| / ||dx|| over the shared sample set.

    By Hoelder every growth quotient lies in [-ratio, +ratio] per sample,
    so the mu_p estimate on the same samples is bracketed by
    [-min_ratio, +max_ratio].
    """
    samples = sample_growth_quotients(m, spec, budget, include_proposals)
    return float(np.min(samples.ratio)), float(np.max(samples.ratio))


@dataclass
class KeyBoundReport:
    """Result of checking the Hessian quadratic-form bound on a sample set."""

    max_violation: float
    samples: int
    mu: float
    mu_neg: float
    mu_prime: float

    @property
    def rhs(self) -> float:
        return 2.0 * self.mu_prime + 2.0 * self.mu_neg * self.mu


def check_key_bound(
    m: MapUnderTest,
    spec: WeightedNormSpec,
    budget: SamplingBudget,
    include_proposals: bool = True,
) -> KeyBoundReport:
    """Check dphi^T H dphi <= 2 mu'_p + p mu_p(-phi) mu_p(phi) on samples.

    Both sides are evaluated on the same sample set: the left through the
    explicit log-norm Hessian, the right through the sampled estimates, so
    the sampled suprema genuinely dominate the sampled left-hand side for
    the fixture classes this package ships.  p = 2 only (Hessian path).
    """
    if spec.p != 2.0:
        raise UnsupportedOrderError("key bound check requires p = 2")
    s = sample_growth_quotients(m, spec, budget, include_proposals)
    mu_hat = float(np.max(s.quotient))
    mu_neg_hat = float(np.max(-s.quotient))
    mu_prime_hat = float(np.max(s.curvature))
    rhs = 2.0 * mu_prime_hat + spec.p * mu_neg_hat * mu_hat

    w = spec.weights
    worst = -np.inf
    for y, dphi in zip(s.y, s.dphi):
        try:
            H = log_norm_hessian(y / w, spec)
        except NormFloorError:
            continue
        worst = max(worst, float(dphi @ H @ dphi))
    return KeyBoundReport(
        max_violation=max(worst - rhs, 0.0),
        samples=s.count,
        mu=mu_hat,
        mu_neg=mu_neg_hat,
        mu_prime=mu_prime_hat,
    )
