"""Numerical verification suite.

Each check measures a worst-case violation of a structural property and
compares it against a fixed threshold.  The CLI `verify` subcommand runs
everything, prints a pass/fail table and writes the per-property max
violations to CSV; the acceptance tests reuse the same check functions at
their own sample sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from . import bounds as bnd
from . import fixtures, models, telemetry
from .indicators import alpha_beta
from .lognorm import (
    MapUnderTest,
    SamplingBudget,
    check_key_bound,
    matrix_measure,
    mu_p,
    sample_growth_quotients,
)
from .norms import WeightedNormSpec, log_norm_gradient, log_norm_hessian
from .projected import (
    CONSTRAINT_REGISTRY,
    build_projected_model,
    data_injection_operator,
    projected_alpha_beta,
    projection_operator,
)
from .sde import SdeModel, simulate_coupled, simulate_ensemble


@dataclass
class PropertyResult:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


def _result(name, value, threshold, detail="") -> PropertyResult:
    value = float(value)
    return PropertyResult(name, value, float(threshold), value <= threshold, detail)


def _rng(seed, *tags) -> Generator:
    return Generator(Philox(SeedSequence((seed, *tags))))


# --------------------------------------------------------------------------
# norms
# --------------------------------------------------------------------------

def gradient_fd_error(n_points: int = 1000, seed: int = 0) -> float:
    """Max relative error of the p=2 log-norm gradient vs central FD."""
    rng = _rng(seed, 10)
    worst = 0.0
    for _ in range(n_points):
        n = int(rng.integers(2, 7))
        w = np.exp(rng.uniform(-1, 1, n))
        spec = WeightedNormSpec(w, 2.0)
        delta = rng.standard_normal(n)
        y = spec.to_weighted(delta)
        g = log_norm_gradient(delta, spec)
        h = 1e-6 * np.linalg.norm(y)
        fd = np.empty(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            fd[i] = (
                np.log(np.linalg.norm(y + e)) - np.log(np.linalg.norm(y - e))
            ) / (2 * h)
        worst = max(worst, np.linalg.norm(fd - g) / np.linalg.norm(g))
    return worst


def hessian_fd_error(n_points: int = 300, seed: int = 0) -> float:
    """Max relative error of the p=2 log-norm Hessian vs second differences."""
    rng = _rng(seed, 11)
    worst = 0.0
    for _ in range(n_points):
        n = int(rng.integers(2, 6))
        spec = WeightedNormSpec.ones(n)
        y = rng.standard_normal(n)
        y /= np.linalg.norm(y)
        H = log_norm_hessian(y, spec)
        h = 1e-4
        fd = np.empty((n, n))
        L = lambda v: np.log(np.linalg.norm(v))  # noqa: E731
        for i in range(n):
            for j in range(n):
                ei = np.zeros(n)
                ej = np.zeros(n)
                ei[i] = h
                ej[j] = h
                fd[i, j] = (
                    L(y + ei + ej) - L(y + ei - ej) - L(y - ei + ej) + L(y - ei - ej)
                ) / (4 * h * h)
        worst = max(worst, np.max(np.abs(fd - H)) / np.max(np.abs(H)))
    return worst


def norm_calculus_identities(n_points: int = 500, seed: int = 0) -> dict:
    """Euler identity, p=2 radial Hessian action, and scale covariance."""
    rng = _rng(seed, 12)
    euler = radial = scaling = 0.0
    for _ in range(n_points):
        n = int(rng.integers(2, 7))
        p = float(rng.choice([1.0, 2.0, 3.0]))
        w = np.exp(rng.uniform(-1, 1, n))
        spec = WeightedNormSpec(w, p)
        delta = rng.standard_normal(n)
        y = spec.to_weighted(delta)
        g = log_norm_gradient(delta, spec)
        euler = max(euler, abs(g @ y - 1.0))
        c = float(rng.uniform(0.1, 10.0))
        g_scaled = log_norm_gradient(c * delta, spec)
        scaling = max(
            scaling, np.max(np.abs(g_scaled - g / c)) / max(np.max(np.abs(g / c)), 1e-30)
        )
        if p == 2.0:
            H = log_norm_hessian(delta, spec)
            radial = max(radial, np.max(np.abs(H @ y + g)) / np.max(np.abs(g)))
            H_scaled = log_norm_hessian(c * delta, spec)
            scaling = max(
                scaling,
                np.max(np.abs(H_scaled - H / c**2)) / max(np.max(np.abs(H / c**2)), 1e-30),
            )
    return {"euler": euler, "radial": radial, "scaling": scaling}


# --------------------------------------------------------------------------
# lognorm
# --------------------------------------------------------------------------

def matrix_measure_oracle_error(n_matrices: int = 100, seed: int = 0) -> float:
    """Closed-form p=2 measure vs an independent eigenvalue oracle."""
    rng = _rng(seed, 20)
    worst = 0.0
    for _ in range(n_matrices):
        A = rng.standard_normal((5, 5))
        w = np.exp(rng.uniform(-0.5, 0.5, 5))
        spec = WeightedNormSpec(w, 2.0)
        got = matrix_measure(A, spec)
        Abar = (w[:, None] * A) / w[None, :]
        oracle = float(np.max(np.real(np.linalg.eigvals(0.5 * (Abar + Abar.T)))))
        worst = max(worst, abs(got - oracle) / max(abs(oracle), 1e-12))
    return worst


def sampled_linear_measure_error(
    n_matrices: int = 100, budget: SamplingBudget | None = None, seed: int = 0
) -> float:
    """Sampling estimator on undeclared linear maps vs the closed form."""
    if budget is None:
        budget = SamplingBudget(base_points=25, directions=400, seed=seed)
    rng = _rng(seed, 21)
    spec = WeightedNormSpec.ones(5)
    worst = 0.0
    for _ in range(n_matrices):
        A = rng.standard_normal((5, 5))
        closed = matrix_measure(A, spec)
        m = MapUnderTest(
            evaluator=lambda x, _A=A: np.asarray(x) @ _A.T,
            lower=[-1.0] * 5,
            upper=[1.0] * 5,
            vectorized=True,
        )
        est = mu_p(m, spec, budget)
        worst = max(worst, abs(est - closed))
    return worst


def _random_map_pair(rng, n, lower, upper, kind):
    if kind == "linear":
        A1 = rng.standard_normal((n, n))
        A2 = rng.standard_normal((n, n))
        f1 = lambda x: np.asarray(x) @ A1.T  # noqa: E731
        f2 = lambda x: np.asarray(x) @ A2.T  # noqa: E731
    else:
        A1 = rng.standard_normal((n, n))
        B1 = rng.standard_normal((n, n)) * 0.8
        s1 = rng.uniform(0.2, 1.5)
        A2 = rng.standard_normal((n, n))
        B2 = rng.standard_normal((n, n)) * 0.8
        s2 = rng.uniform(0.2, 1.5)
        f1 = lambda x: np.asarray(x) @ A1.T + s1 * np.tanh(np.asarray(x) @ B1.T)  # noqa: E731
        f2 = lambda x: np.asarray(x) @ A2.T + s2 * np.sin(np.asarray(x) @ B2.T)  # noqa: E731
    mk = lambda f: MapUnderTest(  # noqa: E731
        evaluator=f, lower=lower, upper=upper, vectorized=True
    )
    fsum = lambda x: f1(x) + f2(x)  # noqa: E731
    return mk(f1), mk(f2), mk(fsum)


def subadditivity_violation(
    n_linear: int = 1000, n_nonlinear: int = 1000, seed: int = 0,
    budget: SamplingBudget | None = None,
) -> float:
    """mu(f1+f2) <= mu(f1) + mu(f2) on shared sample sets (proposals off)."""
    if budget is None:
        budget = SamplingBudget(base_points=6, directions=6, seed=seed)
    rng = _rng(seed, 22)
    spec = WeightedNormSpec.ones(3)
    lower, upper = [-1.0] * 3, [1.0] * 3
    worst = -np.inf
    for kind, count in (("linear", n_linear), ("nonlinear", n_nonlinear)):
        for _ in range(count):
            m1, m2, msum = _random_map_pair(rng, 3, lower, upper, kind)
            e1 = mu_p(m1, spec, budget, include_proposals=False)
            e2 = mu_p(m2, spec, budget, include_proposals=False)
            esum = mu_p(msum, spec, budget, include_proposals=False)
            worst = max(worst, esum - e1 - e2)
    return worst


def lipschitz_sandwich_violation(
    n_linear: int = 1000, n_nonlinear: int = 1000, seed: int = 0,
    budget: SamplingBudget | None = None,
) -> float:
    """-inf_ratio <= mu estimate <= sup_ratio on the same samples (Hoelder)."""
    if budget is None:
        budget = SamplingBudget(base_points=6, directions=6, seed=seed)
    rng = _rng(seed, 23)
    spec = WeightedNormSpec.ones(3)
    lower, upper = [-1.0] * 3, [1.0] * 3
    worst = -np.inf
    for kind, count in (("linear", n_linear), ("nonlinear", n_nonlinear)):
        for _ in range(count):
            m1, _, _ = _random_map_pair(rng, 3, lower, upper, kind)
            s = sample_growth_quotients(m1, spec, budget, include_proposals=False)
            est = float(np.max(s.quotient))
            lo = float(np.min(s.ratio))
            hi = float(np.max(s.ratio))
            worst = max(worst, est - hi, (-lo) - est)
    return worst


def budget_monotonicity_violation(seed: int = 0) -> float:
    """Estimates are running maxima: growing the budget never shrinks them."""
    spec = WeightedNormSpec.ones(2)
    m = MapUnderTest(
        evaluator=lambda x: np.tanh(np.asarray(x) * [1.3, 0.7]) + 0.1 * np.asarray(x) ** 2,
        lower=[-1.5, -1.5],
        upper=[1.5, 1.5],
        vectorized=True,
    )
    grid = {}
    for b in (8, 16):
        for d in (8, 16):
            grid[(b, d)] = mu_p(
                m, spec, SamplingBudget(base_points=b, directions=d, seed=seed)
            )
    worst = -np.inf
    for (b1, d1), v1 in grid.items():
        for (b2, d2), v2 in grid.items():
            if b2 >= b1 and d2 >= d1:
                worst = max(worst, v1 - v2)
    return worst


def determinism_violation(seed: int = 7) -> float:
    spec = WeightedNormSpec.ones(2)
    m = MapUnderTest(
        evaluator=lambda x: np.sin(np.asarray(x)), lower=[-2, -2], upper=[2, 2],
        vectorized=True,
    )
    budget = SamplingBudget(base_points=16, directions=16, seed=seed)
    a = mu_p(m, spec, budget)
    b = mu_p(m, spec, budget)
    return abs(a - b)


def key_bound_fixture_violation(
    budget: SamplingBudget | None = None, seed: int = 0
) -> float:
    """Key Hessian bound on the three shipped fixture maps."""
    if budget is None:
        budget = SamplingBudget(base_points=50, directions=200, seed=seed)
    spec1 = WeightedNormSpec.ones(1)
    spec2 = WeightedNormSpec.ones(2)
    spec3 = WeightedNormSpec.ones(3)
    cases = [
        (MapUnderTest(lambda x: 0.7 * np.asarray(x), [-1.0], [1.0], vectorized=True), spec1),
        (MapUnderTest(lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                      [-1.0, -1.0], [1.0, 1.0], vectorized=True), spec2),
        (MapUnderTest(lambda x: np.tanh(np.asarray(x)),
                      [-2.0] * 3, [2.0] * 3, vectorized=True), spec3),
    ]
    worst = 0.0
    for m, spec in cases:
        worst = max(worst, check_key_bound(m, spec, budget).max_violation)
    return worst


def epsilon_asymmetry_product(seed: int = 0, eps: float = 1e-3) -> tuple[float, float]:
    """p=1 channel with tiny mu(b) but O(1/eps) mu(-b): the product stays O(1).

    Returns (mu(b) estimate, mu(b)*mu(-b) product estimate)."""
    spec = WeightedNormSpec.ones(1, p=1.0)

    def kinked(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, eps * x, -x / eps)

    m = MapUnderTest(kinked, [-1.0], [1.0], vectorized=True)
    budget = SamplingBudget(base_points=64, directions=8, seed=seed)
    mu_plus = mu_p(m, spec, budget)
    mu_minus = mu_p(m.negated(), spec, budget)
    return mu_plus, mu_plus * mu_minus


# --------------------------------------------------------------------------
# sde
# --------------------------------------------------------------------------

def coupling_exactness_error(seed: int = 3) -> float:
    """Additive noise: the perturbation follows the noise-free recursion."""
    theta, sigma, dt, T = 1.0, 0.5, 1e-3, 1.0
    model = models.ou(theta, sigma)
    delta0 = 1e-3
    traj = simulate_coupled(model, [0.5], [delta0], T=T, dt=dt, seed=seed)
    deltas = traj.delta[:, 0]
    k = np.arange(len(deltas))
    exact = delta0 * (1.0 - theta * dt) ** k
    return float(np.max(np.abs(deltas - exact) / np.abs(exact)))


def seed_determinism_violation(seed: int = 5) -> float:
    model = models.gbm(0.1, 0.3)
    a = simulate_coupled(model, [1.0], [1e-4], T=0.2, dt=1e-3, seed=seed)
    b = simulate_coupled(model, [1.0], [1e-4], T=0.2, dt=1e-3, seed=seed)
    same = np.array_equal(a.base, b.base) and np.array_equal(a.perturbed, b.perturbed)
    return 0.0 if same else 1.0


def grid_refinement_gap(seed: int = 11, n_paths: int = 2000) -> tuple[float, float]:
    """(gap, tolerance): ensemble mean rates at dt and dt/2 must agree."""
    model = models.gbm(0.1, 0.3)
    out = []
    for dt in (2e-3, 1e-3):
        ens = simulate_ensemble(model, [1.0], [1e-4], T=1.0, dt=dt,
                                n_paths=n_paths, seed=seed)
        rates = ens.path_mean_rates()
        out.append((rates.mean(), rates.std(ddof=1) / math.sqrt(len(rates))))
    (m1, s1), (m2, s2) = out
    return abs(m1 - m2), 3.0 * (s1 + s2) + 5e-4


def gbm_strong_order_ratio(seed: int = 13, n_paths: int = 2000) -> float:
    """RMS strong error vs the exact lognormal solution; halving dt should
    shrink it by about sqrt(2)."""
    a, b, T = 0.1, 0.3, 1.0
    model = models.gbm(a, b)
    errs = []
    for dt in (2e-3, 1e-3):
        ens = simulate_ensemble(model, [1.0], [1e-4], T=T, dt=dt,
                                n_paths=n_paths, seed=seed)
        wT = ens.terminal_wiener[ens.valid_mask, 0]
        exact_rate = (a - 0.5 * b * b) + (b / T) * wT
        rates = ens.path_mean_rates()
        errs.append(math.sqrt(np.mean((rates - exact_rate) ** 2)))
    return errs[0] / errs[1]


# --------------------------------------------------------------------------
# indicators
# --------------------------------------------------------------------------

def gbm_alpha_errors(seed: int = 0) -> tuple[float, float]:
    """(delegated error, sampled error) of alpha vs a - b^2/2 for GBM."""
    a, b = 0.1, 0.3
    model = models.gbm(a, b)
    spec = WeightedNormSpec.ones(1)
    exact = a - 0.5 * b * b
    budget = SamplingBudget(base_points=32, directions=32, seed=seed)
    delegated = alpha_beta(model, spec, budget, delegate=True).alpha
    sampled = alpha_beta(model, spec, budget, delegate=False).alpha
    return abs(delegated - exact), abs(sampled - exact)


def mean_bound_gap(model, x0, delta0, seed=17, n_paths=3000, dt=1e-3, T=1.0,
                   budget=None) -> tuple[float, float]:
    """(mean rate - alpha, 3 SE + integrator tolerance) for one model."""
    spec = WeightedNormSpec.ones(model.n)
    report = alpha_beta(model, spec, budget or SamplingBudget(seed=seed))
    ens = simulate_ensemble(model, x0, delta0, T=T, dt=dt, n_paths=n_paths, seed=seed)
    rates = ens.path_mean_rates()
    se = rates.std(ddof=1) / math.sqrt(len(rates))
    return rates.mean() - report.alpha, 3.0 * se + 1e-3


def variance_bound_gap(model, x0, delta0, seed=19, n_paths=3000, dt=1e-3, T=1.0,
                       budget=None) -> tuple[float, float]:
    """(var rate - 1.05 beta, tolerance) for one model.

    The tolerance is 3 SE plus an absolute floor covering the cancellation
    noise of coupled-path arithmetic, which matters only when beta = 0 and
    the increments are deterministic up to rounding.
    """
    spec = WeightedNormSpec.ones(model.n)
    report = alpha_beta(model, spec, budget or SamplingBudget(seed=seed))
    ens = simulate_ensemble(model, x0, delta0, T=T, dt=dt, n_paths=n_paths, seed=seed)
    pooled = ens.pooled_increments()
    var_rate = float(np.var(pooled, ddof=1)) / dt
    se = var_rate * math.sqrt(2.0 / (pooled.size - 1))
    return var_rate - 1.05 * report.beta, 3.0 * se + 1e-18


def disturbance_decoupling_ratio(seed: int = 23) -> float:
    """Rotational (g-orthogonal) diffusion: per-step variance of Y relative
    to the naive squared channel magnitude; should be tiny."""
    sigma = 1.0
    R = np.array([[0.0, -1.0], [1.0, 0.0]]) * sigma

    model = SdeModel(
        n=2,
        m=1,
        drift=lambda x, t: np.zeros_like(np.asarray(x, dtype=float)),
        diffusion=(lambda x, t: np.asarray(x, dtype=float) @ R.T,),
        lower=np.array([-2.0, -2.0]),
        upper=np.array([2.0, 2.0]),
        label="rotational-noise",
        vectorized=True,
    )
    ens = simulate_ensemble(model, [0.0, 0.0], [1e-3, 0.0], T=0.05, dt=1e-4,
                            n_paths=500, seed=seed)
    var_rate = float(np.var(ens.pooled_increments(), ddof=1)) / 1e-4
    beta_naive = sigma**2
    return var_rate / beta_naive


def report_consistency_error(seed: int = 29) -> float:
    model = models.lander3dof()
    spec = WeightedNormSpec.ones(6)
    rep = alpha_beta(model, spec, SamplingBudget(base_points=8, directions=8, seed=seed))
    rebuilt = rep.mu_drift + sum(
        c.mu_prime + (rep.p / 2.0) * c.mu_minus * c.mu_plus for c in rep.channels
    )
    beta_rebuilt = sum(c.beta_term for c in rep.channels)
    return max(abs(rebuilt - rep.alpha), abs(beta_rebuilt - rep.beta))


# --------------------------------------------------------------------------
# bounds
# --------------------------------------------------------------------------

BOUNDS_GRID = tuple(
    (alpha_v, beta_v, dt_v)
    for alpha_v in (-0.5, -1.0, -2.0)
    for beta_v in (0.1, 0.25, 1.0)
    for dt_v in (1e-3, 1e-2, 1e-1)
)


def bounds_dominance_violation(
    n_paths: int = 20000, substeps: int = 8, seed: int = 31
) -> tuple[float, float]:
    """(max frequency excess over either bound, min frequency over the grid).

    For each (alpha, beta, dt) grid point a GBM realizing those rates is
    simulated over one window of length dt; the empirical P(Y >= 0) must
    stay below both bounds within 3 binomial SE.
    """
    worst = -np.inf
    min_freq = np.inf
    for i, (alpha_v, beta_v, dt_v) in enumerate(BOUNDS_GRID):
        b = math.sqrt(beta_v)
        a = alpha_v + 0.5 * beta_v
        model = models.gbm(a, b)
        ens = simulate_ensemble(
            model, [1.0], [1e-4], T=dt_v, dt=dt_v / substeps,
            n_paths=n_paths, seed=seed + i,
        )
        est = bnd.window_growth_frequency(ens)
        cher = bnd.chernoff_growth_bound(alpha_v, beta_v, dt_v).value
        cheb = bnd.chebyshev_growth_bound(alpha_v, beta_v, dt_v).value
        slack = 3.0 * est.se
        worst = max(worst, est.frequency - cher - slack, est.frequency - cheb - slack)
        min_freq = min(min_freq, est.frequency)
    return worst, min_freq


def gaussian_oracle_violation() -> float:
    """Phi(alpha sqrt(dt/beta)) <= Chernoff bound, analytically, on the grid."""
    worst = -np.inf
    for alpha_v, beta_v, dt_v in BOUNDS_GRID:
        phi = bnd.gaussian_growth_probability(alpha_v, beta_v, dt_v)
        cher = bnd.chernoff_growth_bound(alpha_v, beta_v, dt_v).raw
        worst = max(worst, phi - cher)
    return worst


def chernoff_monotonicity_violation() -> float:
    """Raw Chernoff bound: decreasing in dt and alpha^2, increasing in beta."""
    worst = -np.inf
    alphas = (-0.5, -1.0, -2.0)
    betas = (0.1, 0.25, 1.0)
    dts = (1e-3, 1e-2, 1e-1)
    raw = lambda a, b, d: bnd.chernoff_growth_bound(a, b, d).raw  # noqa: E731
    for a in alphas:
        for b in betas:
            for d1, d2 in zip(dts, dts[1:]):
                worst = max(worst, raw(a, b, d2) - raw(a, b, d1))
    for b in betas:
        for d in dts:
            for a1, a2 in zip(alphas, alphas[1:]):  # |a2| > |a1|
                worst = max(worst, raw(a2, b, d) - raw(a1, b, d))
    for a in alphas:
        for d in dts:
            for b1, b2 in zip(betas, betas[1:]):
                worst = max(worst, raw(a, b1, d) - raw(a, b2, d))
    return worst


def ou_zero_frequency(seed: int = 37, n_paths: int = 500) -> float:
    """Additive-noise contraction has per-step growth frequency exactly 0."""
    model = models.ou(1.0, 0.5)
    ens = simulate_ensemble(model, [0.5], [1e-3], T=0.1, dt=1e-3,
                            n_paths=n_paths, seed=seed)
    worst = 0.0
    for k in range(ens.log_increments.shape[1]):
        worst = max(worst, bnd.empirical_growth_probability(ens, k).frequency)
    return worst


# --------------------------------------------------------------------------
# projected
# --------------------------------------------------------------------------

def projection_algebra_violation(n_cases: int = 1000, seed: int = 41) -> float:
    """Pi/C identities and the null-space / pseudo-inverse oracles."""
    rng = _rng(seed, 40)
    worst = 0.0
    for _ in range(n_cases):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, n))
        H = rng.standard_normal((k, n))
        if np.linalg.cond(H @ H.T) > 1e6:
            continue
        Pi = projection_operator(H)
        C = data_injection_operator(H)
        worst = max(
            worst,
            float(np.max(np.abs(Pi @ Pi - Pi))),
            float(np.max(np.abs(Pi - Pi.T))),
            float(np.max(np.abs(Pi @ H.T))),
            float(np.max(np.abs(H @ C - np.eye(k)))),
        )
        # independent constructions
        _, _, vt = np.linalg.svd(H)
        Q = vt[k:].T
        worst = max(worst, float(np.max(np.abs(Pi - Q @ Q.T))))
        worst = max(worst, float(np.max(np.abs(C - np.linalg.pinv(H)))))
    return worst


def _contracting_plane_model(domain) -> SdeModel:
    return SdeModel(
        n=2,
        m=0,
        drift=lambda x, t: -np.asarray(x, dtype=float),
        diffusion=(),
        lower=np.asarray(domain[0], dtype=float),
        upper=np.asarray(domain[1], dtype=float),
        label="contracting-plane",
        vectorized=True,
        drift_affine=(-np.eye(2), np.zeros(2)),
    )


def projected_fixture_betas(seed: int = 43) -> dict:
    """beta of the projected dynamics for the shipped constraint fixtures."""
    spec = WeightedNormSpec.ones(2)
    budget = SamplingBudget(base_points=48, directions=48, seed=seed)
    base_box = _contracting_plane_model(([-2.0, -2.0], [2.0, 2.0]))
    base_annulus = _contracting_plane_model(([0.6, 0.6], [1.8, 1.8]))

    linear = projected_alpha_beta(
        base_box, CONSTRAINT_REGISTRY["coordinate"](index=0, n=2), spec, budget
    )
    rng_rep = projected_alpha_beta(
        base_annulus, CONSTRAINT_REGISTRY["range"](n=2), spec, budget
    )
    scaled = projected_alpha_beta(
        base_annulus, CONSTRAINT_REGISTRY["range"](n=2), spec, budget, noise_scale=2.0
    )
    parab = projected_alpha_beta(
        base_box, CONSTRAINT_REGISTRY["parabola"](), spec, budget
    )
    return {
        "linear_beta": linear.beta,
        "range_beta": rng_rep.beta,
        "range_beta_scaled": scaled.beta,
        "parabola_mu_drift": parab.mu_drift,
    }


def wrapper_consistency_violation(seed: int = 47) -> float:
    """projected_alpha_beta must equal the generic pipeline on the built model."""
    spec = WeightedNormSpec.ones(2)
    budget = SamplingBudget(base_points=24, directions=24, seed=seed)
    base = _contracting_plane_model(([0.6, 0.6], [1.8, 1.8]))
    proj = CONSTRAINT_REGISTRY["range"](n=2)
    wrapped = projected_alpha_beta(base, proj, spec, budget)
    direct = alpha_beta(build_projected_model(base, proj), spec, budget)
    return max(abs(wrapped.alpha - direct.alpha), abs(wrapped.beta - direct.beta))


# --------------------------------------------------------------------------
# telemetry
# --------------------------------------------------------------------------

def fixture_discrimination(window: int = 51, **fixture_kwargs) -> dict:
    """Frequency/cumulative ratios and terminal concentration of the pair."""
    stable, destab = fixtures.synthetic_descent_pair(**fixture_kwargs)
    spec = fixtures.descent_norm_spec()
    si = telemetry.analyze_series(stable, spec, window=window)
    di = telemetry.analyze_series(destab, spec, window=window)
    T = destab.times[-1]
    pre = di.cum_instability[di.times < 0.8 * T]
    pre_cum = float(pre[-1]) if len(pre) else 0.0
    return {
        "stable_frequency": si.frequency,
        "destabilized_frequency": di.frequency,
        "frequency_ratio": di.frequency / si.frequency if si.frequency else math.inf,
        "stable_cumulative": si.cumulative,
        "destabilized_cumulative": di.cumulative,
        "cumulative_ratio": di.cumulative / si.cumulative if si.cumulative else math.inf,
        "terminal_fraction": (di.cumulative - pre_cum) / di.cumulative,
    }


def telemetry_scaling_errors(scale: float = 1e3) -> tuple[float, float]:
    """(max |alpha diff|, frequency mismatch flag) under uniform state rescale."""
    stable, _ = fixtures.synthetic_descent_pair()
    spec = fixtures.descent_norm_spec()
    base = telemetry.analyze_series(stable, spec, window=51)
    scaled_series = telemetry.StateSeries(
        times=stable.times,
        states=stable.states * scale,
        labels=stable.labels,
        source=stable.source,
    )
    scaled = telemetry.analyze_series(scaled_series, spec, window=51)
    alpha_err = float(np.max(np.abs(scaled.alpha - base.alpha)))
    freq_flag = 0.0 if scaled.frequency == base.frequency else 1.0
    log_shift = scaled.log_norm - base.log_norm - math.log(scale)
    return max(alpha_err, float(np.max(np.abs(log_shift)))), freq_flag


def telemetry_summary_consistency() -> float:
    _, destab = fixtures.synthetic_descent_pair()
    spec = fixtures.descent_norm_spec()
    ind = telemetry.analyze_series(destab, spec, window=51)
    cum_err = abs(
        float(np.sum(np.maximum(ind.alpha, 0.0) * ind.dt_pair)) - ind.cumulative
    )
    freq_err = abs(ind.frequency - np.sum(ind.alpha > 0.0) / ind.n_steps)
    return max(cum_err, freq_err)


# --------------------------------------------------------------------------
# suite assembly
# --------------------------------------------------------------------------

def run_suite(seed: int = 0, modules=None) -> list[PropertyResult]:
    """Run the verification checks (optionally a subset of module names)."""
    wanted = set(modules) if modules else None
    results: list[PropertyResult] = []

    def want(name):
        return wanted is None or name in wanted

    if want("norms"):
        results.append(_result("norms.gradient_vs_fd", gradient_fd_error(300, seed), 1e-6))
        results.append(_result("norms.hessian_vs_fd", hessian_fd_error(100, seed), 1e-5))
        ids = norm_calculus_identities(300, seed)
        results.append(_result("norms.euler_identity", ids["euler"], 1e-12))
        results.append(_result("norms.hessian_radial", ids["radial"], 1e-10))
        results.append(_result("norms.scale_covariance", ids["scaling"], 1e-12))

    if want("lognorm"):
        results.append(
            _result("lognorm.matrix_measure_oracle", matrix_measure_oracle_error(100, seed), 1e-9)
        )
        results.append(
            _result("lognorm.sampled_vs_closed", sampled_linear_measure_error(30, seed=seed), 5e-3)
        )
        results.append(
            _result("lognorm.subadditivity", subadditivity_violation(150, 150, seed), 1e-8)
        )
        results.append(
            _result("lognorm.lipschitz_sandwich", lipschitz_sandwich_violation(150, 150, seed), 1e-8)
        )
        results.append(
            _result("lognorm.budget_monotonicity", budget_monotonicity_violation(seed), 0.0)
        )
        results.append(_result("lognorm.determinism", determinism_violation(seed + 7), 0.0))
        results.append(
            _result("lognorm.key_bound_fixtures", key_bound_fixture_violation(seed=seed), 1e-8)
        )
        mu_plus, product = epsilon_asymmetry_product(seed)
        results.append(
            _result(
                "lognorm.p1_asymmetric_product",
                abs(product - 1.0),
                0.05,
                detail=f"mu(b)={mu_plus:.2e}, mu(b)*mu(-b)={product:.4f}",
            )
        )

    if want("sde"):
        results.append(_result("sde.coupling_exactness", coupling_exactness_error(seed + 3), 1e-9))
        results.append(_result("sde.seed_determinism", seed_determinism_violation(seed + 5), 0.0))
        gap, tol = grid_refinement_gap(seed + 11)
        results.append(_result("sde.grid_refinement", gap, tol))
        ratio = gbm_strong_order_ratio(seed + 13)
        results.append(
            _result(
                "sde.strong_order_half",
                abs(ratio - math.sqrt(2.0)),
                0.35,
                detail=f"error ratio dt/(dt/2) = {ratio:.3f}",
            )
        )

    if want("indicators"):
        d_err, s_err = gbm_alpha_errors(seed)
        results.append(_result("indicators.gbm_alpha_closed", d_err, 1e-9))
        results.append(_result("indicators.gbm_alpha_sampled", s_err, 1e-3))
        for name, model, x0, d0 in (
            ("gbm", models.gbm(0.1, 0.3), [1.0], [1e-4]),
            ("ou", models.ou(1.0, 0.5), [0.5], [1e-3]),
            ("lander3dof", models.lander3dof(), *[list(v) for v in models.default_initial_state("lander3dof")]),
        ):
            gap, tol = mean_bound_gap(model, x0, d0, seed=seed + 17, n_paths=2000)
            results.append(_result(f"indicators.mean_bound[{name}]", gap, tol))
            gap, tol = variance_bound_gap(model, x0, d0, seed=seed + 19, n_paths=2000)
            results.append(_result(f"indicators.variance_bound[{name}]", gap, tol))
        results.append(
            _result("indicators.disturbance_decoupling", disturbance_decoupling_ratio(seed + 23), 1e-3)
        )
        results.append(
            _result("indicators.report_consistency", report_consistency_error(seed + 29), 1e-12)
        )

    if want("bounds"):
        worst, min_freq = bounds_dominance_violation(n_paths=20000, seed=seed + 31)
        results.append(_result("bounds.mc_dominance", worst, 0.0))
        results.append(
            _result(
                "bounds.nonzero_probability",
                0.0 if min_freq > 0.0 else 1.0,
                0.0,
                detail=f"min frequency over grid = {min_freq:.4f}",
            )
        )
        results.append(_result("bounds.gaussian_oracle", gaussian_oracle_violation(), 1e-12))
        results.append(_result("bounds.chernoff_monotonicity", chernoff_monotonicity_violation(), 0.0))
        results.append(_result("bounds.ou_zero_frequency", ou_zero_frequency(seed + 37), 0.0))

    if want("projected"):
        results.append(
            _result("projected.algebra", projection_algebra_violation(300, seed + 41), 1e-10)
        )
        betas = projected_fixture_betas(seed + 43)
        results.append(_result("projected.linear_beta_zero", betas["linear_beta"], 0.0))
        results.append(
            _result(
                "projected.range_beta_positive",
                0.0 if betas["range_beta"] > 0 else 1.0,
                0.0,
                detail=f"beta = {betas['range_beta']:.4f}",
            )
        )
        scale_err = abs(betas["range_beta_scaled"] - 4.0 * betas["range_beta"]) / (
            4.0 * betas["range_beta"]
        )
        results.append(_result("projected.noise_scaling", scale_err, 1e-6))
        results.append(
            _result(
                "projected.curvature_flip",
                0.0 if betas["parabola_mu_drift"] > 0 else 1.0,
                0.0,
                detail=f"mu(Pi f) = {betas['parabola_mu_drift']:.4f} (mu(f) = -1)",
            )
        )
        results.append(
            _result("projected.wrapper_consistency", wrapper_consistency_violation(seed + 47), 0.0)
        )

    if want("telemetry"):
        disc = fixture_discrimination()
        results.append(
            _result(
                "telemetry.frequency_ratio",
                2.0 - disc["frequency_ratio"],
                0.0,
                detail=f"stable {disc['stable_frequency']:.3f}, "
                f"destabilized {disc['destabilized_frequency']:.3f}",
            )
        )
        results.append(
            _result(
                "telemetry.cumulative_ratio",
                10.0 - disc["cumulative_ratio"],
                0.0,
                detail=f"ratio = {disc['cumulative_ratio']:.1f}",
            )
        )
        results.append(
            _result(
                "telemetry.terminal_concentration",
                0.8 - disc["terminal_fraction"],
                0.0,
                detail=f"fraction = {disc['terminal_fraction']:.4f}",
            )
        )
        worst_ratio = min(
            fixture_discrimination(window=w)["frequency_ratio"] for w in (21, 51, 101)
        )
        results.append(
            _result("telemetry.window_robustness", 2.0 - worst_ratio, 0.0,
                    detail=f"min ratio over windows = {worst_ratio:.2f}")
        )
        a_err, f_flag = telemetry_scaling_errors()
        results.append(_result("telemetry.scaling_alpha_invariance", a_err, 1e-9))
        results.append(_result("telemetry.scaling_frequency_exact", f_flag, 0.0))
        results.append(
            _result("telemetry.summary_consistency", telemetry_summary_consistency(), 1e-12)
        )

    return results


MODULE_NAMES = (
    "norms", "lognorm", "sde", "indicators", "bounds", "projected", "telemetry",
)
