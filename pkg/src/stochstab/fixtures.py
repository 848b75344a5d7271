"""Synthetic descent telemetry fixtures.

A stable/destabilized pair sharing one nominal descent profile: position
and velocity of a decelerating lander over a fixed horizon, with small
sensor-like jitter.  The destabilized member additionally carries a
multiplicative noise burst on the velocity channels in the terminal phase,
which is where real descents lose transient stability.  Used by the
verification suite and as a ready-made input for the telemetry pipeline.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .norms import WeightedNormSpec
from .telemetry import StateSeries

# Documented default scales for descent states: 1 km position tolerance,
# 10 m/s velocity tolerance.
POSITION_SCALE = 1000.0
VELOCITY_SCALE = 10.0


def descent_norm_spec(p: float = 2.0) -> WeightedNormSpec:
    """Weighted norm for 6-state position/velocity descent telemetry."""
    w = np.array([1.0 / POSITION_SCALE] * 3 + [1.0 / VELOCITY_SCALE] * 3)
    return WeightedNormSpec(w, p)


def synthetic_descent_pair(
    seed: int = 20240801,
    duration: float = 100.0,
    dt: float = 0.05,
    contraction: float = 0.03,
    v0=(5.0, 5.0, -40.0),
    jitter: float = 2.2e-6,
    burst_window: tuple = (0.82, 0.99),
    burst_amplitude: float = 2e-3,
    burst_noise: float = 6e-4,
    burst_frequency: float = 0.8,
) -> tuple[StateSeries, StateSeries]:
    """Build the (stable, destabilized) telemetry pair.

    The nominal profile decelerates exponentially at ``contraction`` so the
    incremental perturbation norm decays at that rate; ``jitter`` sets the
    weighted sensor noise level relative to the decaying increment scale.
    The burst multiplies the velocity states by an oscillation plus noise,
    ramped inside ``burst_window`` (fractions of the horizon).
    """
    n_steps = int(round(duration / dt))
    t = dt * np.arange(n_steps + 1)
    lam = contraction
    v0 = np.asarray(v0, dtype=float)

    decay = np.exp(-lam * t)[:, None]
    v_nom = v0[None, :] * decay

    rng = Generator(Philox(SeedSequence((seed, 0))))
    # Weighted-unit jitter, scaled down with the nominal increment so the
    # stable member's growth-rate statistics are stationary.
    w_inv = np.array([POSITION_SCALE] * 3 + [VELOCITY_SCALE] * 3)
    noise = jitter * rng.standard_normal((n_steps + 1, 6)) * decay * w_inv[None, :]

    def assemble(v_series):
        r = np.empty((n_steps + 1, 3))
        r[0] = np.array([200.0, 150.0, -v0[2] / lam * (1.0 - np.exp(-lam * duration))])
        for k in range(n_steps):
            r[k + 1] = r[k] + v_series[k] * dt
        return np.hstack([r, v_series])

    stable_states = assemble(v_nom) + noise

    lo = burst_window[0] * duration
    hi = burst_window[1] * duration
    ramp = np.zeros(n_steps + 1)
    inside = (t >= lo) & (t <= hi)
    phase = (t[inside] - lo) / (hi - lo)
    ramp[inside] = np.sin(np.pi * phase) ** 2

    burst_rng = Generator(Philox(SeedSequence((seed, 1))))
    osc = burst_amplitude * np.sin(2.0 * np.pi * burst_frequency * (t - lo))
    rough = burst_noise * burst_rng.standard_normal(n_steps + 1)
    factor = 1.0 + ramp * (osc + rough)
    v_burst = v_nom * factor[:, None]

    destab_states = assemble(v_burst) + noise

    stable = StateSeries(
        times=t,
        states=stable_states,
        labels=("rx", "ry", "rz", "vx", "vy", "vz"),
        source=f"synthetic-stable(seed={seed})",
    )
    destab = StateSeries(
        times=t,
        states=destab_states,
        labels=("rx", "ry", "rz", "vx", "vy", "vz"),
        source=f"synthetic-destabilized(seed={seed})",
    )
    return stable, destab


def write_descent_pair(out_dir, **kwargs) -> tuple[str, str]:
    """Write the fixture pair as CSV files; returns the two paths."""
    import csv
    import os

    os.makedirs(out_dir, exist_ok=True)
    stable, destab = synthetic_descent_pair(**kwargs)
    paths = []
    for name, series in (("stable.csv", stable), ("destabilized.csv", destab)):
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("t",) + series.labels)
            for tk, row in zip(series.times, series.states):
                writer.writerow([f"{tk:.17g}"] + [f"{v:.17g}" for v in row])
        paths.append(path)
    return tuple(paths)
