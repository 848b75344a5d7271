"""Ito SDE models and coupled-path Euler-Maruyama simulation.

The base path and the perturbed path are driven by the *same* Wiener
increments, so their difference realizes the finite perturbation exactly as
finite differences of the drift and diffusion fields.  Gaussian increments
are produced by inverse-CDF transform of uniforms from a single
counter-based Philox stream: within one run, (step k, path i, channel j)
consumes the uniform at flat counter k*N*m + i*m + j.  A one-path ensemble
therefore reproduces `simulate_coupled` with the same seed bit for bit, and
ensembles are reproducible independently of how paths are scheduled.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox, SeedSequence
from scipy.special import ndtri

from .norms import NORM_FLOOR, WeightedNormSpec


class SimulationError(RuntimeError):
    """Simulation aborted; carries the offending step index."""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step


@dataclass(frozen=True)
class SdeModel:
    """dX = f(X,t) dt + sum_j b_j(X,t) dW_j on an axis-aligned domain box.

    ``vectorized`` promises drift/diffusion accept (batch, n) rows.
    ``drift_affine`` / ``diffusion_affine`` optionally declare affine
    structure (A, c) per field, enabling closed-form growth measures.
    ``m = 0`` is the deterministic limit.
    """

    n: int
    m: int
    drift: object
    diffusion: tuple
    lower: np.ndarray
    upper: np.ndarray
    label: str = ""
    vectorized: bool = False
    drift_affine: tuple | None = None
    diffusion_affine: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "diffusion", tuple(self.diffusion))
        if len(self.diffusion) != self.m:
            raise ValueError(f"expected {self.m} diffusion channels")
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != (self.n,) or hi.shape != (self.n,):
            raise ValueError("domain bounds must have shape (n,)")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if self.diffusion_affine is not None:
            object.__setattr__(self, "diffusion_affine", tuple(self.diffusion_affine))


@dataclass
class CoupledTrajectory:
    """Uniform time grid with a base path and a perturbed path."""

    times: np.ndarray
    base: np.ndarray
    perturbed: np.ndarray
    seed: int
    dt: float

    def __post_init__(self):
        if not (len(self.times) == len(self.base) == len(self.perturbed)):
            raise ValueError("times, base and perturbed must have equal length")
        if len(self.times) > 1:
            gaps = np.diff(self.times)
            if np.max(np.abs(gaps - self.dt)) > 1e-12 * max(abs(self.dt), 1.0):
                raise ValueError("time grid is not uniformly spaced by dt")

    @property
    def delta(self) -> np.ndarray:
        return self.perturbed - self.base


@dataclass
class PathFailure:
    path: int
    step: int
    reason: str


@dataclass
class EnsembleSummary:
    """Per-path log-norm increments plus per-step ensemble statistics.

    Rows of ``log_increments`` belonging to failed paths are NaN from the
    failure step on and are excluded from the per-step statistics; the
    failures themselves are listed, never silently dropped.
    """

    times: np.ndarray
    dt: float
    seed: int
    n_paths: int
    log_increments: np.ndarray   # (N, steps)
    terminal_log_norm: np.ndarray  # (N,)
    mean_increment: np.ndarray   # (steps,) over surviving paths
    var_increment: np.ndarray    # (steps,)
    terminal_wiener: np.ndarray  # (N, m) accumulated Wiener sums
    failures: list = field(default_factory=list)

    @property
    def n_failed(self) -> int:
        return len(self.failures)

    @property
    def valid_mask(self) -> np.ndarray:
        mask = np.ones(self.n_paths, dtype=bool)
        for f in self.failures:
            mask[f.path] = False
        return mask

    def path_mean_rates(self) -> np.ndarray:
        """Per surviving path, the mean log-growth rate over the horizon."""
        rows = self.log_increments[self.valid_mask]
        return rows.mean(axis=1) / self.dt

    def pooled_increments(self) -> np.ndarray:
        return self.log_increments[self.valid_mask].ravel()

    def nonneg_counts(self, step: int) -> tuple[int, int]:
        """(# surviving paths with Y_step >= 0, # surviving paths)."""
        col = self.log_increments[self.valid_mask, step]
        return int(np.sum(col >= 0.0)), col.size


def _pnorm_rows(y: np.ndarray, p: float) -> np.ndarray:
    if np.isinf(p):
        return np.max(np.abs(y), axis=-1)
    if p == 2.0:
        return np.linalg.norm(y, axis=-1)
    if p == 1.0:
        return np.sum(np.abs(y), axis=-1)
    return np.sum(np.abs(y) ** p, axis=-1) ** (1.0 / p)


def _n_steps(T: float, dt: float) -> int:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if T < dt:
        raise ValueError("horizon T must be at least one step")
    return int(round(T / dt))


def _gaussian_increments(rng: Generator, shape, dt: float) -> np.ndarray:
    # Inverse-CDF keeps one uniform raw per increment, preserving the
    # counter mapping.  The clamp guards the measure-zero u = 0 draw.
    u = rng.random(shape)
    return ndtri(np.maximum(u, 2.0**-53)) * np.sqrt(dt)


def _check_start(model, x0, delta0, spec):
    x0 = np.asarray(x0, dtype=float)
    delta0 = np.asarray(delta0, dtype=float)
    if x0.shape != (model.n,) or delta0.shape != (model.n,):
        raise ValueError("x0 and delta0 must have shape (n,)")
    if spec is None:
        spec = WeightedNormSpec.ones(model.n)
    r0 = _pnorm_rows(spec.to_weighted(delta0), spec.p)
    if not r0 > NORM_FLOOR:
        raise ValueError("initial perturbation is at or below the norm floor")
    return x0, delta0, spec


def simulate_coupled(
    model: SdeModel,
    x0,
    delta0,
    T: float,
    dt: float,
    seed: int,
    spec: WeightedNormSpec | None = None,
    t0: float = 0.0,
) -> CoupledTrajectory:
    """Euler-Maruyama for base and perturbed paths under shared increments."""
    x0, delta0, spec = _check_start(model, x0, delta0, spec)
    steps = _n_steps(T, dt)
    rng = Generator(Philox(SeedSequence((seed,))))

    base = np.empty((steps + 1, model.n))
    pert = np.empty((steps + 1, model.n))
    base[0] = x0
    pert[0] = x0 + delta0
    x, xp = base[0].copy(), pert[0].copy()

    for k in range(steps):
        t = t0 + k * dt
        dw = _gaussian_increments(rng, model.m, dt) if model.m else ()
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                fx = np.asarray(model.drift(x, t), dtype=float)
                fxp = np.asarray(model.drift(xp, t), dtype=float)
                inc_x = fx * dt
                inc_xp = fxp * dt
                for j, b in enumerate(model.diffusion):
                    inc_x = inc_x + np.asarray(b(x, t), dtype=float) * dw[j]
                    inc_xp = inc_xp + np.asarray(b(xp, t), dtype=float) * dw[j]
        except SimulationError:
            raise
        except Exception as exc:  # noqa: BLE001
            raise SimulationError(f"model evaluation failed: {exc}", k) from exc
        x = x + inc_x
        xp = xp + inc_xp
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xp))):
            raise SimulationError("non-finite state encountered", k)
        base[k + 1] = x
        pert[k + 1] = xp

    times = t0 + dt * np.arange(steps + 1)
    return CoupledTrajectory(times=times, base=base, perturbed=pert, seed=seed, dt=dt)


def simulate_ensemble(
    model: SdeModel,
    x0,
    delta0,
    T: float,
    dt: float,
    n_paths: int,
    seed: int,
    spec: WeightedNormSpec | None = None,
    t0: float = 0.0,
) -> EnsembleSummary:
    """Monte Carlo ensemble of coupled paths with per-step statistics.

    All paths advance in lockstep from one Philox stream (see module
    docstring for the counter mapping); an ensemble of one path is
    bit-identical to `simulate_coupled` with the same seed.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    x0, delta0, spec = _check_start(model, x0, delta0, spec)
    steps = _n_steps(T, dt)
    N, n, m = n_paths, model.n, model.m
    rng = Generator(Philox(SeedSequence((seed,))))

    X = np.tile(x0, (N, 1))
    Xp = np.tile(x0 + delta0, (N, 1))
    active = np.ones(N, dtype=bool)
    failures: list[PathFailure] = []

    log_norm = np.log(_pnorm_rows(spec.to_weighted(Xp - X), spec.p))
    increments = np.full((N, steps), np.nan)
    wiener = np.zeros((N, max(m, 1)))

    def eval_field(fn, pts, t):
        if model.vectorized:
            return np.asarray(fn(pts, t), dtype=float)
        return np.stack([np.asarray(fn(row, t), dtype=float) for row in pts])

    for k in range(steps):
        t = t0 + k * dt
        dw = _gaussian_increments(rng, (N, m), dt) if m else np.zeros((N, 0))
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                fx = eval_field(model.drift, X, t)
                fxp = eval_field(model.drift, Xp, t)
                inc_x = fx * dt
                inc_xp = fxp * dt
                for j, b in enumerate(model.diffusion):
                    bj_x = eval_field(b, X, t)
                    bj_xp = eval_field(b, Xp, t)
                    inc_x = inc_x + bj_x * dw[:, j : j + 1]
                    inc_xp = inc_xp + bj_xp * dw[:, j : j + 1]
        except Exception as exc:  # noqa: BLE001
            raise SimulationError(f"model evaluation failed: {exc}", k) from exc

        with np.errstate(over="ignore", invalid="ignore"):
            newX = np.where(active[:, None], X + inc_x, X)
            newXp = np.where(active[:, None], Xp + inc_xp, Xp)
        if m:
            wiener[active] += dw[active]

        finite = np.all(np.isfinite(newX), axis=1) & np.all(
            np.isfinite(newXp), axis=1
        )
        d_norm = np.full(N, np.nan)
        finite_rows = np.where(finite)[0]
        if finite_rows.size:
            with np.errstate(over="ignore", invalid="ignore"):
                d_norm[finite_rows] = _pnorm_rows(
                    spec.to_weighted(newXp[finite_rows] - newX[finite_rows]), spec.p
                )
        ok = finite & np.isfinite(d_norm) & (d_norm > NORM_FLOOR)

        newly_bad = active & ~ok
        for i in np.where(newly_bad)[0]:
            if not finite[i]:
                reason = "non-finite state"
            elif not np.isfinite(d_norm[i]):
                reason = "perturbation norm overflow"
            else:
                reason = "norm below floor"
            failures.append(PathFailure(path=int(i), step=k, reason=reason))
        # Freeze failed paths at their last good state; stats exclude them.
        newX[newly_bad] = X[newly_bad]
        newXp[newly_bad] = Xp[newly_bad]
        active &= ok

        new_log = np.where(active, np.log(np.where(ok, d_norm, 1.0)), np.nan)
        increments[active, k] = new_log[active] - log_norm[active]
        log_norm = np.where(active, new_log, log_norm)
        X, Xp = newX, newXp

    valid = np.ones(N, dtype=bool)
    for f in failures:
        valid[f.path] = False
    rows = increments[valid]
    if rows.size:
        mean_inc = rows.mean(axis=0)
        var_inc = rows.var(axis=0, ddof=1) if rows.shape[0] > 1 else np.zeros(steps)
    else:
        mean_inc = np.full(steps, np.nan)
        var_inc = np.full(steps, np.nan)

    terminal = np.where(valid, log_norm, np.nan)
    times = t0 + dt * np.arange(steps + 1)
    return EnsembleSummary(
        times=times,
        dt=dt,
        seed=seed,
        n_paths=N,
        log_increments=increments,
        terminal_log_norm=terminal,
        mean_increment=mean_inc,
        var_increment=var_inc,
        terminal_wiener=wiener[:, :m] if m else np.zeros((N, 0)),
        failures=failures,
    )


def trajectory_to_csv(traj: CoupledTrajectory, path) -> None:
    """Write `t, x_1..x_n, xp_1..xp_n` rows with round-trippable precision."""
    n = traj.base.shape[1]
    header = ["t"] + [f"x_{i+1}" for i in range(n)] + [f"xp_{i+1}" for i in range(n)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t, row, rowp in zip(traj.times, traj.base, traj.perturbed):
            writer.writerow(
                [f"{t:.17g}"]
                + [f"{v:.17g}" for v in row]
                + [f"{v:.17g}" for v in rowp]
            )
