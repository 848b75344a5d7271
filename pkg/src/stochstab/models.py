"""Built-in SDE models selectable by name from the CLI."""

from __future__ import annotations

import numpy as np

from .sde import SdeModel


def gbm(a: float = 0.1, b: float = 0.3, domain=(0.5, 2.0)) -> SdeModel:
    """Scalar geometric Brownian motion dX = a X dt + b X dW."""
    A = np.array([[a]])
    B = np.array([[b]])
    return SdeModel(
        n=1,
        m=1,
        drift=lambda x, t: a * np.asarray(x, dtype=float),
        diffusion=(lambda x, t: b * np.asarray(x, dtype=float),),
        lower=np.array([domain[0]]),
        upper=np.array([domain[1]]),
        label=f"gbm(a={a}, b={b})",
        vectorized=True,
        drift_affine=(A, np.zeros(1)),
        diffusion_affine=((B, np.zeros(1)),),
    )


def ou(theta: float = 1.0, sigma: float = 0.5, n: int = 1, domain=(-2.0, 2.0)) -> SdeModel:
    """Ornstein-Uhlenbeck dX = -theta X dt + sigma dW, one additive noise
    channel per state component."""
    n = int(n)
    A = -theta * np.eye(n)

    def channel(j):
        e = np.zeros(n)
        e[j] = sigma

        def b(x, t, _e=e):
            x = np.asarray(x, dtype=float)
            return np.broadcast_to(_e, x.shape).copy() if x.ndim > 1 else _e.copy()

        return b, e

    chans, offsets = zip(*(channel(j) for j in range(n)))
    return SdeModel(
        n=n,
        m=n,
        drift=lambda x, t: -theta * np.asarray(x, dtype=float),
        diffusion=chans,
        lower=np.full(n, domain[0]),
        upper=np.full(n, domain[1]),
        label=f"ou(theta={theta}, sigma={sigma}, n={n})",
        vectorized=True,
        drift_affine=(A, np.zeros(n)),
        diffusion_affine=tuple((np.zeros((n, n)), e) for e in offsets),
    )


def lander3dof(
    kp: float = 0.09,
    kd: float = 0.6,
    sigma: float = 0.05,
) -> SdeModel:
    """Point-mass descent stand-in: position/velocity state, PD thrust drift,
    multiplicative noise on each velocity component.

    State is (r_x, r_y, r_z, v_x, v_y, v_z) with the landing target at the
    origin; the thrust acceleration -kp r - kd v cancels gravity exactly.
    Desk-scale parameters, not a flight model.
    """
    A = np.zeros((6, 6))
    A[:3, 3:] = np.eye(3)
    A[3:, :3] = -kp * np.eye(3)
    A[3:, 3:] = -kd * np.eye(3)

    def drift(x, t):
        x = np.asarray(x, dtype=float)
        return x @ A.T

    def channel(j):
        E = np.zeros((6, 6))
        E[3 + j, 3 + j] = sigma

        def b(x, t, _E=E):
            return np.asarray(x, dtype=float) @ _E.T

        return b, E

    chans, mats = zip(*(channel(j) for j in range(3)))
    lower = np.array([-2000.0, -2000.0, 0.0, -60.0, -60.0, -60.0])
    upper = np.array([2000.0, 2000.0, 2000.0, 20.0, 20.0, 20.0])
    return SdeModel(
        n=6,
        m=3,
        drift=drift,
        diffusion=chans,
        lower=lower,
        upper=upper,
        label=f"lander3dof(kp={kp}, kd={kd}, sigma={sigma})",
        vectorized=True,
        drift_affine=(A, np.zeros(6)),
        diffusion_affine=tuple((E, np.zeros(6)) for E in mats),
    )


# name -> (builder, parameter defaults, default x0, default delta0)
MODEL_REGISTRY = {
    "gbm": (gbm, {"a": 0.1, "b": 0.3}, [1.0], [1e-4]),
    "ou": (ou, {"theta": 1.0, "sigma": 0.5, "n": 1}, [1.0], [1e-3]),
    "lander3dof": (
        lander3dof,
        {"kp": 0.09, "kd": 0.6, "sigma": 0.05},
        [500.0, 400.0, 1200.0, -15.0, -10.0, -40.0],
        [1.0, 1.0, 1.0, 0.01, 0.01, 0.01],
    ),
}


def build_model(name: str, **params) -> SdeModel:
    if name not in MODEL_REGISTRY:
        known = ", ".join(sorted(MODEL_REGISTRY))
        raise ValueError(f"unknown model '{name}' (known: {known})")
    builder, defaults, _, _ = MODEL_REGISTRY[name]
    merged = dict(defaults)
    for key, value in params.items():
        if value is None:
            continue
        if key not in defaults:
            raise ValueError(f"model '{name}' has no parameter '{key}'")
        merged[key] = value
    return builder(**merged)


def default_initial_state(name: str) -> tuple[np.ndarray, np.ndarray]:
    _, _, x0, d0 = MODEL_REGISTRY[name]
    return np.asarray(x0, dtype=float), np.asarray(d0, dtype=float)
