"""Acceptance suite: one test per criterion, one printed line per criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines; every
tolerance is pinned here.
"""

import math
import time

import numpy as np
import pytest

from stochstab import fixtures, telemetry, verify
from stochstab.bounds import empirical_growth_probability
from stochstab.cli import run as cli_run
from stochstab.indicators import alpha_beta
from stochstab.lognorm import SamplingBudget
from stochstab.models import gbm, ou
from stochstab.norms import WeightedNormSpec
from stochstab.sde import simulate_ensemble

SEED = 20240801


def _report(num: int, description: str, ok: bool, detail: str = ""):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {description}"
          f"{' -- ' + detail if detail else ''}")
    assert ok, f"criterion {num} failed: {description} {detail}"


def test_c01_gbm_mean_growth_tightness():
    t0 = time.perf_counter()
    a, b = 0.1, 0.3
    exact = a - b * b / 2.0
    spec = WeightedNormSpec.ones(1)
    budget = SamplingBudget(base_points=32, directions=32, seed=SEED)

    delegated = alpha_beta(gbm(a, b), spec, budget, delegate=True).alpha
    sampled = alpha_beta(gbm(a, b), spec, budget, delegate=False).alpha

    ens = simulate_ensemble(gbm(a, b), [1.0], [1e-4], T=1.0, dt=1e-3,
                            n_paths=10_000, seed=SEED)
    rates = ens.path_mean_rates()
    se = rates.std(ddof=1) / math.sqrt(len(rates))
    mc_gap = abs(rates.mean() - exact)
    elapsed = time.perf_counter() - t0

    ok = (abs(delegated - exact) < 1e-9
          and abs(sampled - exact) < 1e-3
          and mc_gap < 3 * se
          and elapsed < 10.0)
    _report(1, "GBM mean growth bound is tight", ok,
            f"alpha={delegated:.6f}, MC gap={mc_gap:.2e} (3SE={3*se:.2e}), "
            f"{elapsed:.1f}s")
    globals()["_C1_ENSEMBLE"] = ens


def test_c02_gbm_variance_tightness():
    b = 0.3
    ens = globals().get("_C1_ENSEMBLE") or simulate_ensemble(
        gbm(0.1, b), [1.0], [1e-4], T=1.0, dt=1e-3, n_paths=10_000, seed=SEED
    )
    spec = WeightedNormSpec.ones(1)
    beta_val = alpha_beta(gbm(0.1, b), spec,
                          SamplingBudget(seed=SEED)).beta
    pooled = ens.pooled_increments()
    var_rate = float(np.var(pooled, ddof=1)) / ens.dt
    se = var_rate * math.sqrt(2.0 / (pooled.size - 1))
    gap = abs(var_rate - b * b)
    ok = beta_val == pytest.approx(0.09, abs=1e-12) and gap < 3 * se
    _report(2, "GBM variance growth bound is tight", ok,
            f"beta={beta_val:.6f}, Var(Y)/dt={var_rate:.6f}, "
            f"gap={gap:.2e} (3SE={3*se:.2e})")


def test_c03_matrix_measures():
    oracle_err = verify.matrix_measure_oracle_error(100, seed=SEED)
    sampled_err = verify.sampled_linear_measure_error(
        100, budget=SamplingBudget(base_points=25, directions=400, seed=SEED),
        seed=SEED,
    )
    ok = oracle_err < 1e-9 and sampled_err < 5e-3
    _report(3, "matrix measures match oracle and sampling", ok,
            f"oracle rel err={oracle_err:.2e}, sampled err={sampled_err:.2e}")


def test_c04_log_norm_calculus():
    grad_err = verify.gradient_fd_error(1000, seed=SEED)
    hess_err = verify.hessian_fd_error(1000, seed=SEED)
    key_violation = verify.key_bound_fixture_violation(
        budget=SamplingBudget(base_points=50, directions=200, seed=SEED)
    )
    ok = grad_err < 1e-6 and hess_err < 1e-5 and key_violation <= 1e-8
    _report(4, "log-norm gradient/Hessian calculus verified", ok,
            f"grad={grad_err:.2e}, hess={hess_err:.2e}, "
            f"key bound violation={key_violation:.2e}")


def test_c05_structural_inequalities():
    sub = verify.subadditivity_violation(1000, 1000, seed=SEED)
    sand = verify.lipschitz_sandwich_violation(1000, 1000, seed=SEED)
    ok = sub <= 1e-8 and sand <= 1e-8
    _report(5, "subadditivity and Lipschitz sandwich hold", ok,
            f"subadditivity={sub:.2e}, sandwich={sand:.2e}")


def test_c06_probabilistic_bounds():
    worst, min_freq = verify.bounds_dominance_violation(
        n_paths=100_000, substeps=4, seed=SEED
    )
    oracle = verify.gaussian_oracle_violation()
    ens = simulate_ensemble(ou(1.0, 0.5), [0.5], [1e-3], T=0.05, dt=1e-3,
                            n_paths=100_000, seed=SEED)
    ou_freq = max(
        empirical_growth_probability(ens, k).frequency
        for k in range(ens.log_increments.shape[1])
    )
    ok = worst <= 0.0 and oracle <= 1e-12 and min_freq > 0.0 and ou_freq == 0.0
    _report(6, "Chernoff/Chebyshev dominate Monte Carlo; growth probability "
               "positive iff beta > 0", ok,
            f"dominance slack={-worst:.3f}, oracle gap={oracle:.1e}, "
            f"min freq={min_freq:.4f}, OU freq={ou_freq}")


def test_c07_projection_algebra():
    algebra = verify.projection_algebra_violation(1000, seed=SEED)
    betas = verify.projected_fixture_betas(seed=SEED)
    scale_err = abs(betas["range_beta_scaled"] - 4.0 * betas["range_beta"]) / (
        4.0 * betas["range_beta"]
    )
    ok = (algebra <= 1e-10
          and betas["linear_beta"] == 0.0
          and betas["range_beta"] > 0.0
          and scale_err <= 1e-6)
    _report(7, "projection algebra and data-induced variance verified", ok,
            f"algebra={algebra:.2e}, linear beta={betas['linear_beta']}, "
            f"range beta={betas['range_beta']:.3f}, scaling err={scale_err:.2e}")


def test_c08_telemetry_discrimination():
    t0 = time.perf_counter()
    disc = verify.fixture_discrimination(window=51)
    elapsed = time.perf_counter() - t0
    ok = (disc["frequency_ratio"] >= 2.0
          and disc["cumulative_ratio"] >= 10.0
          and disc["terminal_fraction"] >= 0.8
          and elapsed < 5.0)
    _report(8, "stable/destabilized descent discrimination", ok,
            f"freq {disc['stable_frequency']:.3f} vs "
            f"{disc['destabilized_frequency']:.3f} (ratio "
            f"{disc['frequency_ratio']:.2f}), cum ratio "
            f"{disc['cumulative_ratio']:.0f}, terminal "
            f"{disc['terminal_fraction']:.3f}, {elapsed:.1f}s")


def test_c09_telemetry_robustness():
    ratios = {
        w: verify.fixture_discrimination(window=w)["frequency_ratio"]
        for w in (21, 51, 101)
    }
    alpha_err, freq_flag = verify.telemetry_scaling_errors(scale=1e3)

    stable, destab = fixtures.synthetic_descent_pair()
    spec = fixtures.descent_norm_spec()
    scaled = []
    for series in (stable, destab):
        big = telemetry.StateSeries(times=series.times,
                                    states=series.states * 1e3)
        scaled.append(telemetry.analyze_series(big, spec, window=51).frequency)
    scaled_ratio = scaled[1] / scaled[0]

    ok = (min(ratios.values()) >= 2.0
          and alpha_err < 1e-9
          and freq_flag == 0.0
          and scaled_ratio >= 2.0)
    _report(9, "discrimination robust to window and state rescaling", ok,
            f"ratios by window {{21: {ratios[21]:.2f}, 51: {ratios[51]:.2f}, "
            f"101: {ratios[101]:.2f}}}, alpha drift={alpha_err:.1e}, "
            f"scaled ratio={scaled_ratio:.2f}")


def test_c10_verify_reproducibility(tmp_path, capsys):
    t0 = time.perf_counter()
    outputs = []
    for i in (1, 2):
        out_dir = tmp_path / f"run{i}"
        code = cli_run(["verify", "--seed", "0", "--out", str(out_dir)])
        stdout = capsys.readouterr().out
        csv_bytes = (out_dir / "violations.csv").read_bytes()
        outputs.append((code, stdout, csv_bytes))
    elapsed = time.perf_counter() - t0

    codes_ok = outputs[0][0] == 0 and outputs[1][0] == 0
    # stdout differs only in the --out path; strip those lines
    def strip_paths(text):
        return "\n".join(l for l in text.splitlines()
                         if "wrote" not in l and "manifest" not in l)

    identical = (strip_paths(outputs[0][1]) == strip_paths(outputs[1][1])
                 and outputs[0][2] == outputs[1][2])
    ok = codes_ok and identical and elapsed < 180.0
    _report(10, "verify suite reproducible end-to-end", ok,
            f"two runs in {elapsed:.1f}s, identical={identical}")
