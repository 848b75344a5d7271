"""Data-constrained (projected) stochastic dynamics.

A constraint/observation function h with Jacobian H induces the tangential
projector Pi = I - H^T (H H^T)^-1 H and the injection operator
C = H^T (H H^T)^-1 (the minimum-norm right inverse of H).  The projected
model evolves under Pi f plus injection of the mean observation rate, with
one observation-noise channel -C^j per constraint component.  State
dependence of C turns observation noise into state-dependent diffusion,
which is exactly what degrades transient stability margins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .indicators import AlphaBetaReport, alpha_beta
from .lognorm import SamplingBudget
from .norms import WeightedNormSpec
from .sde import SdeModel


class RankDeficiencyError(ValueError):
    """H H^T too ill-conditioned to invert; carries the condition number."""

    def __init__(self, cond: float, cap: float):
        super().__init__(
            f"H H^T condition number {cond:.3e} exceeds the cap {cap:.1e}"
        )
        self.cond = cond


@dataclass(frozen=True)
class ProjectionSpec:
    """Constraint function h(x, t) -> R^k with optional analytic Jacobian.

    When ``jacobian`` is omitted it is formed by central finite differences
    with a relative step of ``fd_step``.  ``dt_h`` is the explicit time
    derivative of h (zero when omitted) and ``y_bar`` the mean observation
    rate (zero when omitted: pure constraint enforcement).  ``vectorized``
    promises h / jacobian / dt_h accept (batch, n) rows.
    """

    h: object
    k: int
    jacobian: object = None
    dt_h: object = None
    y_bar: object = None
    cond_cap: float = 1e8
    fd_step: float = 1e-6
    vectorized: bool = False
    name: str = ""

    def jacobian_at(self, x, t: float) -> np.ndarray:
        """H(x, t); shape (k, n) for a vector x, (S, k, n) for a batch."""
        x = np.asarray(x, dtype=float)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(x, t), dtype=float)
        return self._fd_jacobian(x, t)

    def _fd_jacobian(self, x, t: float) -> np.ndarray:
        single = x.ndim == 1
        pts = x[None, :] if single else x
        n = pts.shape[1]
        J = np.empty((pts.shape[0], self.k, n))
        for l in range(n):
            step = self.fd_step * (1.0 + np.abs(pts[:, l]))
            hi = pts.copy()
            lo = pts.copy()
            hi[:, l] += step
            lo[:, l] -= step
            if self.vectorized:
                dh = np.asarray(self.h(hi, t), float) - np.asarray(self.h(lo, t), float)
            else:
                dh = np.stack(
                    [
                        np.asarray(self.h(a, t), float) - np.asarray(self.h(b, t), float)
                        for a, b in zip(hi, lo)
                    ]
                )
            J[:, :, l] = dh.reshape(pts.shape[0], self.k) / (2.0 * step)[:, None]
        return J[0] if single else J

    def dt_h_at(self, x, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dt_h is None:
            shape = (self.k,) if x.ndim == 1 else (x.shape[0], self.k)
            return np.zeros(shape)
        return np.asarray(self.dt_h(x, t), dtype=float)

    def y_bar_at(self, t: float) -> np.ndarray:
        if self.y_bar is None:
            return np.zeros(self.k)
        return np.asarray(self.y_bar(t), dtype=float)


def _gram_solve(H: np.ndarray, rhs: np.ndarray, cond_cap: float) -> np.ndarray:
    """Solve (H H^T) z = rhs with a condition-number guard (no regularizing)."""
    M = H @ np.swapaxes(H, -1, -2)
    sv = np.linalg.svd(M, compute_uv=False)
    smin = np.min(sv, axis=-1)
    smax = np.max(sv, axis=-1)
    cond = np.where(smin > 0, smax / np.where(smin > 0, smin, 1.0), np.inf)
    worst = float(np.max(cond))
    if not np.isfinite(worst) or worst > cond_cap:
        raise RankDeficiencyError(worst, cond_cap)
    return np.linalg.solve(M, rhs)


def projection_operator(H, cond_cap: float = 1e8) -> np.ndarray:
    """Pi = I - H^T (H H^T)^-1 H: symmetric, idempotent, annihilates H^T."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    n = H.shape[1]
    return np.eye(n) - H.T @ _gram_solve(H, H, cond_cap)


def data_injection_operator(H, cond_cap: float = 1e8) -> np.ndarray:
    """C = H^T (H H^T)^-1: minimum-norm right inverse of H (H C = I_k)."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    return _gram_solve(H, H, cond_cap).T


def _batched_pi_c(H: np.ndarray, cond_cap: float):
    """(S, k, n) -> Pi (S, n, n) and C (S, n, k)."""
    n = H.shape[-1]
    Z = _gram_solve(H, H, cond_cap)          # (S, k, n) = (HH^T)^-1 H
    C = np.swapaxes(Z, -1, -2)               # (S, n, k)
    Pi = np.eye(n)[None] - np.einsum("ski,skj->sij", H, Z, optimize=True)
    return Pi, C


def build_projected_model(
    base: SdeModel,
    proj: ProjectionSpec,
    noise_scale: float = 1.0,
    include_process_noise: bool = False,
) -> SdeModel:
    """Projected SDE: drift Pi f + C (y_bar - dh/dt), channels -C^j.

    k = 0 means no constraint: the base model is returned unchanged.  The
    observation-noise channels carry the minus sign of the injected noise;
    ``noise_scale`` multiplies them.  ``include_process_noise`` additionally
    carries the base channels through the projector (the growth theorem
    covers the observation channels; the process-noise carry-over is an
    engineering option).
    """
    if proj.k == 0:
        return base
    if proj.k > base.n:
        raise ValueError("constraint dimension k must not exceed the state dimension")
    cap = proj.cond_cap

    def drift(x, t):
        x = np.asarray(x, dtype=float)
        f = np.asarray(base.drift(x, t), dtype=float)
        inj = proj.y_bar_at(t) - proj.dt_h_at(x, t)
        H = proj.jacobian_at(x, t)
        if x.ndim == 1:
            Pi = projection_operator(H, cap)
            C = data_injection_operator(H, cap)
            return Pi @ f + C @ inj
        Pi, C = _batched_pi_c(H, cap)
        return np.einsum("sij,sj->si", Pi, f) + np.einsum("sij,sj->si", C, inj)

    def make_channel(j):
        def channel(x, t, _j=j):
            x = np.asarray(x, dtype=float)
            H = proj.jacobian_at(x, t)
            if x.ndim == 1:
                C = data_injection_operator(H, cap)
                return -noise_scale * C[:, _j]
            _, C = _batched_pi_c(H, cap)
            return -noise_scale * C[:, :, _j]

        return channel

    channels = [make_channel(j) for j in range(proj.k)]

    if include_process_noise:
        def make_projected(b):
            def channel(x, t, _b=b):
                x = np.asarray(x, dtype=float)
                bx = np.asarray(_b(x, t), dtype=float)
                H = proj.jacobian_at(x, t)
                if x.ndim == 1:
                    return projection_operator(H, cap) @ bx
                Pi, _ = _batched_pi_c(H, cap)
                return np.einsum("sij,sj->si", Pi, bx)

            return channel

        channels.extend(make_projected(b) for b in base.diffusion)

    name = proj.name or "constraint"
    return SdeModel(
        n=base.n,
        m=len(channels),
        drift=drift,
        diffusion=tuple(channels),
        lower=base.lower,
        upper=base.upper,
        label=f"{base.label}|{name}(scale={noise_scale})",
        vectorized=base.vectorized and proj.vectorized,
    )


def projected_alpha_beta(
    base: SdeModel,
    proj: ProjectionSpec,
    spec: WeightedNormSpec | None = None,
    budget: SamplingBudget | None = None,
    noise_scale: float = 1.0,
    include_process_noise: bool = False,
    at_time: float = 0.0,
    domain=None,
) -> AlphaBetaReport:
    """Growth report of the projected model.

    A convenience wrapper: it builds the projected model and runs the
    generic indicator pipeline on it, so there is exactly one estimation
    code path.
    """
    model = build_projected_model(base, proj, noise_scale, include_process_noise)
    return alpha_beta(model, spec, budget, at_time=at_time, domain=domain)


# --- shipped constraint fixtures -------------------------------------------

def coordinate_constraint(index: int = 0, n: int = 2) -> ProjectionSpec:
    """Linear observation of one state component: h(x) = x_index."""
    e = np.zeros(n)
    e[index] = 1.0

    def h(x, t):
        x = np.asarray(x, dtype=float)
        return x[..., index : index + 1]

    def jac(x, t):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return e[None, :]
        return np.broadcast_to(e[None, None, :], (x.shape[0], 1, n)).copy()

    return ProjectionSpec(h=h, k=1, jacobian=jac, vectorized=True, name="coordinate")


def range_constraint(n: int = 2) -> ProjectionSpec:
    """Range (distance-to-origin) measurement: h(x) = ||x||_2.

    The Jacobian is x^T / ||x||, so the injection operator is state
    dependent; use on domains excluding the origin.
    """

    def h(x, t):
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x, axis=-1, keepdims=True)

    def jac(x, t):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        u = x / r
        if x.ndim == 1:
            return u[None, :]
        return u[:, None, :]

    return ProjectionSpec(h=h, k=1, jacobian=jac, vectorized=True, name="range")


def parabola_constraint(curvature: float = 1.0) -> ProjectionSpec:
    """Curved constraint h(x) = x_2 - curvature * x_1^2 on the plane.

    A contractive drift can acquire a positive tangential growth rate
    under this projector: curvature modifies contraction.
    """

    def h(x, t):
        x = np.asarray(x, dtype=float)
        return (x[..., 1] - curvature * x[..., 0] ** 2)[..., None]

    def jac(x, t):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return np.array([[-2.0 * curvature * x[0], 1.0]])
        J = np.empty((x.shape[0], 1, 2))
        J[:, 0, 0] = -2.0 * curvature * x[:, 0]
        J[:, 0, 1] = 1.0
        return J

    return ProjectionSpec(h=h, k=1, jacobian=jac, vectorized=True, name="parabola")


CONSTRAINT_REGISTRY = {
    "coordinate": coordinate_constraint,
    "range": range_constraint,
    "parabola": parabola_constraint,
}
