"""Empirical transient-stability analysis of recorded trajectories.

Perturbations are built directly from time-adjacent samples,
dX(t) = X(t + dt) - X(t), without any system identification.  From their
weighted log norms the module extracts per-step growth rates, a
velocity-normalized variant, a windowed variance indicator, and the two
scalar summaries that discriminate stable from destabilized descents:
the instability frequency (fraction of steps with positive growth rate)
and the cumulative instability (time integral of the positive part).
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .norms import NORM_FLOOR, Perturbation, WeightedNormSpec, weighted_p_norm


class TelemetryFormatError(ValueError):
    """Input telemetry file violates the configured schema."""


class WindowError(ValueError):
    """Variance window incompatible with the series."""


@dataclass(frozen=True)
class TelemetrySchema:
    """Column mapping for telemetry CSV files."""

    time_column: str = "t"
    state_columns: tuple = ("rx", "ry", "rz", "vx", "vy", "vz")

    @classmethod
    def from_string(cls, spec: str) -> "TelemetrySchema":
        cols = [c.strip() for c in spec.split(",") if c.strip()]
        if len(cols) < 2:
            raise TelemetryFormatError("schema needs a time column and at least one state column")
        return cls(time_column=cols[0], state_columns=tuple(cols[1:]))


@dataclass
class StateSeries:
    """Recorded state samples on a strictly increasing (not necessarily
    uniform) time grid."""

    times: np.ndarray
    states: np.ndarray
    labels: tuple = ()
    source: str = ""
    n_dropped: int = 0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2 or len(self.times) != len(self.states):
            raise ValueError("states must be (len(times), n)")
        if len(self.times) and np.any(np.diff(self.times) <= 0):
            raise TelemetryFormatError("timestamps must be strictly increasing")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("states contain non-finite entries")
        if not self.labels:
            self.labels = tuple(f"x{i}" for i in range(self.states.shape[1]))

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return len(self.times)


def load_telemetry(path, schema: TelemetrySchema | None = None) -> StateSeries:
    """Parse a telemetry CSV, dropping rows with gaps or non-finite values.

    The drop count is carried on the returned series.  Missing columns,
    non-monotonic timestamps and empty files are reported as errors.
    """
    schema = schema or TelemetrySchema()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise TelemetryFormatError(f"{path}: empty file")
        missing = [
            c
            for c in (schema.time_column, *schema.state_columns)
            if c not in reader.fieldnames
        ]
        if missing:
            raise TelemetryFormatError(f"{path}: missing columns {missing}")
        times, rows = [], []
        dropped = 0
        for rec in reader:
            try:
                t = float(rec[schema.time_column])
                state = [float(rec[c]) for c in schema.state_columns]
            except (TypeError, ValueError):
                dropped += 1
                continue
            if not (math.isfinite(t) and all(math.isfinite(v) for v in state)):
                dropped += 1
                continue
            times.append(t)
            rows.append(state)
    if not rows:
        raise TelemetryFormatError(f"{path}: no valid data rows")
    return StateSeries(
        times=np.asarray(times),
        states=np.asarray(rows),
        labels=schema.state_columns,
        source=str(path),
        n_dropped=dropped,
    )


def incremental_perturbations(series: StateSeries) -> list[Perturbation]:
    """dX_k = X(t_{k+1}) - X(t_k), timestamped at t_k with dt_k recorded."""
    if len(series) < 2:
        raise ValueError("need at least two samples to form perturbations")
    out = []
    for k in range(len(series) - 1):
        out.append(
            Perturbation(
                delta=series.states[k + 1] - series.states[k],
                t=float(series.times[k]),
                dt=float(series.times[k + 1] - series.times[k]),
            )
        )
    return out


@dataclass
class IndicatorSeries:
    """Per-step transient-stability observables plus scalar summaries.

    All arrays share the timestamps of the first member of each adjacent
    perturbation pair.  ``cum_instability`` is the running integral of
    max(alpha, 0); ``frequency`` is the exact fraction of steps with
    alpha > 0.
    """

    times: np.ndarray
    log_norm: np.ndarray
    alpha: np.ndarray
    alpha_norm: np.ndarray
    beta: np.ndarray
    cum_instability: np.ndarray
    dt_pair: np.ndarray
    frequency: float
    cumulative: float
    window: int
    n_steps: int
    n_dropped: int
    v_scale: float = float("nan")

    def summary_dict(self) -> dict:
        return {
            "frequency": self.frequency,
            "cumulative": self.cumulative,
            "window": self.window,
            "n_steps": self.n_steps,
            "n_dropped": self.n_dropped,
        }


def indicator_series(
    perturbations,
    spec: WeightedNormSpec,
    window: int = 51,
    speeds=None,
    eta: float = 0.05,
) -> IndicatorSeries:
    """Extract the transient-stability observables from a perturbation run.

    Perturbations at or below the norm floor (repeated identical telemetry
    rows) are excluded with a count rather than clamped.  ``speeds``, when
    given, must align with the input perturbations; the growth rate is then
    also reported normalized by max(speed, eta * median speed), dividing
    out descent-rate variation without terminal blow-up.
    """
    if window % 2 == 0 or window < 3:
        raise WindowError("window must be an odd count >= 3")
    perturbations = list(perturbations)
    if speeds is not None:
        speeds = np.asarray(speeds, dtype=float)
        if len(speeds) != len(perturbations):
            raise ValueError("speeds must align with the perturbations")

    norms = np.array([weighted_p_norm(p.delta, spec) for p in perturbations])
    keep = norms > NORM_FLOOR
    n_dropped = int(np.sum(~keep))
    kept = [p for p, k in zip(perturbations, keep) if k]
    if len(kept) < window + 1:
        raise WindowError(
            f"need at least window+1 = {window + 1} valid perturbations, "
            f"got {len(kept)}"
        )

    log_norm = np.log(norms[keep])
    t = np.array([p.t for p in kept])
    dt_pair = np.diff(t)
    y = np.diff(log_norm)
    alpha = y / dt_pair

    z = y / np.sqrt(dt_pair)
    half = window // 2
    beta = np.empty_like(alpha)
    for k in range(len(alpha)):
        lo = max(0, k - half)
        hi = min(len(alpha), k + half + 1)
        beta[k] = np.var(z[lo:hi], ddof=1)

    cum = np.cumsum(np.maximum(alpha, 0.0) * dt_pair)

    v_scale = float("nan")
    if speeds is not None:
        kept_speeds = speeds[keep]
        v_scale = float(np.median(kept_speeds))
    if speeds is not None and v_scale > 0:
        step_speed = kept_speeds[:-1]
        alpha_norm = alpha * v_scale / np.maximum(step_speed, eta * v_scale)
    else:
        alpha_norm = alpha.copy()

    n_steps = len(alpha)
    frequency = float(np.sum(alpha > 0.0)) / n_steps
    return IndicatorSeries(
        times=t[:-1],
        log_norm=log_norm[:-1],
        alpha=alpha,
        alpha_norm=alpha_norm,
        beta=beta,
        cum_instability=cum,
        dt_pair=dt_pair,
        frequency=frequency,
        cumulative=float(cum[-1]),
        window=window,
        n_steps=n_steps,
        n_dropped=n_dropped,
        v_scale=v_scale,
    )


def analyze_series(
    series: StateSeries,
    spec: WeightedNormSpec | None = None,
    window: int = 51,
    velocity_components=None,
    eta: float = 0.05,
) -> IndicatorSeries:
    """Full pipeline: perturbations, speeds, indicator extraction.

    ``velocity_components`` picks the state components whose Euclidean norm
    is the descent speed; defaults to components 3:6 for six-state
    position/velocity telemetry, otherwise no normalization.
    """
    if spec is None:
        spec = WeightedNormSpec.ones(series.n)
    perts = incremental_perturbations(series)
    if velocity_components is None:
        velocity_components = (3, 4, 5) if series.n >= 6 else ()
    speeds = None
    if velocity_components:
        idx = list(velocity_components)
        speeds = np.linalg.norm(series.states[:-1, idx], axis=1)
    return indicator_series(perts, spec, window=window, speeds=speeds, eta=eta)


_CSV_COLUMNS = ("t", "log_norm", "alpha", "alpha_norm", "beta", "cum_instability")


def export_indicators(series: IndicatorSeries, out_dir) -> list:
    """Write indicators.csv, summary.csv and one SVG line chart per
    observable.  Floats are printed with 17 significant digits so the CSV
    round-trips losslessly."""
    if series.n_steps == 0:
        raise ValueError("refusing to export an empty indicator series")
    os.makedirs(out_dir, exist_ok=True)
    written = []

    columns = {
        "t": series.times,
        "log_norm": series.log_norm,
        "alpha": series.alpha,
        "alpha_norm": series.alpha_norm,
        "beta": series.beta,
        "cum_instability": series.cum_instability,
    }
    ind_path = os.path.join(out_dir, "indicators.csv")
    with open(ind_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for k in range(series.n_steps):
            writer.writerow([f"{columns[c][k]:.17g}" for c in _CSV_COLUMNS])
    written.append(ind_path)

    sum_path = os.path.join(out_dir, "summary.csv")
    with open(sum_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frequency", "cumulative", "window", "n_steps", "n_dropped"])
        writer.writerow(
            [
                f"{series.frequency:.17g}",
                f"{series.cumulative:.17g}",
                series.window,
                series.n_steps,
                series.n_dropped,
            ]
        )
    written.append(sum_path)

    # Object-oriented matplotlib API: no pyplot global state, safe when
    # several input files are exported from worker threads.
    from matplotlib.figure import Figure

    for name in _CSV_COLUMNS[1:]:
        fig = Figure(figsize=(7, 3))
        ax = fig.subplots()
        ax.plot(series.times, columns[name], lw=0.9)
        ax.set_xlabel("t [s]")
        ax.set_ylabel(name)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = os.path.join(out_dir, f"{name}.svg")
        fig.savefig(path)
        written.append(path)
    return written


def read_indicators(path) -> dict:
    """Parse an exported indicators.csv back into column arrays."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = {c: [] for c in reader.fieldnames}
        for rec in reader:
            for c, v in rec.items():
                cols[c].append(float(v))
    return {c: np.asarray(v) for c, v in cols.items()}
