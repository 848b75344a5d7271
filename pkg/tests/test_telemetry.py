import math

import numpy as np
import numpy.testing as npt
import pytest

from stochstab import fixtures, verify
from stochstab.norms import Perturbation, WeightedNormSpec
from stochstab.telemetry import (
    IndicatorSeries,
    StateSeries,
    TelemetryFormatError,
    TelemetrySchema,
    WindowError,
    analyze_series,
    export_indicators,
    incremental_perturbations,
    indicator_series,
    load_telemetry,
    read_indicators,
)

SPEC2 = WeightedNormSpec.ones(2)


def write_csv(path, rows, header="t,rx,ry,rz,vx,vy,vz"):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")
    return path


class TestLoad:
    def test_well_formed(self, tmp_path):
        path = write_csv(tmp_path / "ok.csv", [
            [0.0, 1, 2, 3, 4, 5, 6],
            [0.1, 1, 2, 3, 4, 5, 6],
            [0.2, 1, 2, 3, 4, 5, 6],
        ])
        series = load_telemetry(path)
        assert len(series) == 3 and series.n == 6 and series.n_dropped == 0

    def test_nan_row_dropped_with_count(self, tmp_path):
        path = write_csv(tmp_path / "gap.csv", [
            [0.0, 1, 2, 3, 4, 5, 6],
            [0.1, 1, "nan", 3, 4, 5, 6],
            [0.2, 1, 2, 3, 4, 5, 6],
        ])
        series = load_telemetry(path)
        assert len(series) == 2 and series.n_dropped == 1

    def test_decreasing_time_rejected(self, tmp_path):
        path = write_csv(tmp_path / "bad.csv", [
            [0.2, 1, 2, 3, 4, 5, 6],
            [0.1, 1, 2, 3, 4, 5, 6],
        ])
        with pytest.raises(TelemetryFormatError):
            load_telemetry(path)

    def test_missing_column(self, tmp_path):
        path = write_csv(tmp_path / "cols.csv", [[0.0, 1, 2]], header="t,rx,ry")
        with pytest.raises(TelemetryFormatError, match="missing columns"):
            load_telemetry(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(TelemetryFormatError):
            load_telemetry(path)

    def test_custom_schema(self, tmp_path):
        path = write_csv(tmp_path / "two.csv", [[0.0, 1, 2], [1.0, 3, 4]],
                         header="time,a,b")
        series = load_telemetry(path, TelemetrySchema.from_string("time,a,b"))
        assert series.n == 2
        npt.assert_array_equal(series.states[1], [3.0, 4.0])


class TestPerturbations:
    def test_linear_ramp_constant_deltas(self):
        t = np.linspace(0.0, 1.0, 11)
        v = np.array([2.0, -1.0])
        series = StateSeries(times=t, states=t[:, None] * v)
        perts = incremental_perturbations(series)
        assert len(perts) == 10
        for p in perts:
            npt.assert_allclose(p.delta, v * 0.1, rtol=1e-12)
            assert p.dt == pytest.approx(0.1)

    def test_exponential_contraction_log_steps(self):
        lam, dt = 0.5, 0.01
        t = dt * np.arange(200)
        series = StateSeries(times=t, states=np.exp(-lam * t)[:, None])
        perts = incremental_perturbations(series)
        logs = np.array([math.log(abs(p.delta[0])) for p in perts])
        steps = np.diff(logs)
        npt.assert_allclose(steps, -lam * dt, atol=1e-6)

    def test_too_short(self):
        series = StateSeries(times=[0.0], states=np.zeros((1, 2)))
        with pytest.raises(ValueError):
            incremental_perturbations(series)


def make_perts(y_steps, dt=0.01, l0=0.0):
    """Perturbation list whose log norms follow cumsum(y_steps)."""
    logs = l0 + np.concatenate([[0.0], np.cumsum(y_steps)])
    out = []
    for k, L in enumerate(logs):
        out.append(Perturbation(delta=[math.exp(L), 0.0], t=k * dt, dt=dt))
    return out


class TestIndicatorSeries:
    def test_exponential_contraction_exact(self):
        lam, dt = 0.5, 0.01
        perts = make_perts(np.full(300, -lam * dt), dt=dt)
        ind = indicator_series(perts, SPEC2, window=51)
        npt.assert_allclose(ind.alpha, -lam, rtol=1e-9)
        assert ind.frequency == 0.0
        assert ind.cumulative == 0.0

    def test_noisy_contraction_recovers_variance(self):
        # Y_k = -0.5 dt + 0.1 sqrt(dt) xi: Var(Y/sqrt(dt)) = 0.01
        rng = np.random.default_rng(0)
        dt = 0.01
        y = -0.5 * dt + 0.1 * math.sqrt(dt) * rng.standard_normal(2000)
        ind = indicator_series(make_perts(y, dt=dt), SPEC2, window=51)
        median_beta = float(np.median(ind.beta))
        assert abs(median_beta - 0.01) < 0.3 * 0.01
        assert ind.frequency > 0.0

    def test_zero_perturbations_excluded_with_count(self):
        t = 0.01 * np.arange(60)
        states = np.cumsum(np.ones((60, 2)), axis=0)
        states[10] = states[9]  # repeated row -> zero perturbation
        series = StateSeries(times=t, states=states)
        ind = analyze_series(series, SPEC2, window=21)
        assert ind.n_dropped == 1
        assert np.all(np.isfinite(ind.alpha))

    def test_window_validation(self):
        perts = make_perts(np.full(30, -1e-3))
        with pytest.raises(WindowError):
            indicator_series(perts, SPEC2, window=10)
        with pytest.raises(WindowError):
            indicator_series(perts, SPEC2, window=51)

    def test_summary_matches_series_exactly(self):
        rng = np.random.default_rng(1)
        y = 0.02 * rng.standard_normal(500) - 1e-3
        ind = indicator_series(make_perts(y), SPEC2, window=21)
        assert ind.frequency == np.sum(ind.alpha > 0) / ind.n_steps
        assert abs(
            float(np.sum(np.maximum(ind.alpha, 0.0) * ind.dt_pair)) - ind.cumulative
        ) < 1e-12
        npt.assert_array_equal(
            ind.cum_instability,
            np.cumsum(np.maximum(ind.alpha, 0.0) * ind.dt_pair),
        )

    def test_non_uniform_sampling(self):
        # alpha uses per-step dt from the timestamps
        lam = 0.3
        t = np.concatenate([[0.0], np.cumsum(np.tile([0.01, 0.03], 100))])
        logs = -lam * t
        perts = [
            Perturbation(delta=[math.exp(L), 0.0], t=tk, dt=dtk)
            for L, tk, dtk in zip(logs, t, np.append(np.diff(t), 0.03))
        ]
        ind = indicator_series(perts, SPEC2, window=21)
        npt.assert_allclose(ind.alpha, -lam, rtol=1e-9)

    def test_velocity_normalization_with_eta_clamp(self):
        dt = 0.01
        y = np.full(200, -1e-3)
        perts = make_perts(y, dt=dt)
        speeds = np.full(len(perts), 10.0)
        speeds[-50:] = 0.0  # terminal touchdown: clamp kicks in
        ind = indicator_series(perts, SPEC2, window=21, speeds=speeds, eta=0.05)
        assert ind.v_scale == 10.0
        npt.assert_allclose(ind.alpha_norm[:100], ind.alpha[:100], rtol=1e-12)
        npt.assert_allclose(ind.alpha_norm[-20:], ind.alpha[-20:] / 0.05, rtol=1e-12)

    def test_scaling_invariance(self):
        err, flag = verify.telemetry_scaling_errors(scale=1e3)
        assert err < 1e-9 and flag == 0.0


class TestExport:
    def test_row_count_and_roundtrip(self, tmp_path):
        rng = np.random.default_rng(2)
        y = 0.01 * rng.standard_normal(60) - 5e-4
        ind = indicator_series(make_perts(y), SPEC2, window=21)
        files = export_indicators(ind, tmp_path / "out")
        data = read_indicators(tmp_path / "out" / "indicators.csv")
        assert len(data["t"]) == ind.n_steps
        npt.assert_array_equal(data["alpha"], ind.alpha)
        npt.assert_array_equal(data["log_norm"], ind.log_norm)
        npt.assert_array_equal(data["beta"], ind.beta)
        npt.assert_array_equal(data["cum_instability"], ind.cum_instability)
        svg = [f for f in files if f.endswith(".svg")]
        assert len(svg) == 5

    def test_summary_file(self, tmp_path):
        y = np.full(40, -1e-3)
        ind = indicator_series(make_perts(y), SPEC2, window=21)
        export_indicators(ind, tmp_path / "out")
        text = (tmp_path / "out" / "summary.csv").read_text().splitlines()
        assert text[0] == "frequency,cumulative,window,n_steps,n_dropped"
        vals = text[1].split(",")
        assert float(vals[0]) == ind.frequency
        assert int(vals[2]) == 21

    def test_empty_series_rejected(self, tmp_path):
        empty = IndicatorSeries(
            times=np.array([]), log_norm=np.array([]), alpha=np.array([]),
            alpha_norm=np.array([]), beta=np.array([]),
            cum_instability=np.array([]), dt_pair=np.array([]),
            frequency=0.0, cumulative=0.0, window=21, n_steps=0, n_dropped=0,
        )
        with pytest.raises(ValueError):
            export_indicators(empty, tmp_path / "out")


class TestDescentFixture:
    def test_pair_shares_nominal_profile(self):
        stable, destab = fixtures.synthetic_descent_pair()
        assert len(stable) == len(destab)
        T = stable.times[-1]
        early = stable.times < 0.5 * T
        npt.assert_array_equal(stable.states[early], destab.states[early])
        assert not np.array_equal(stable.states, destab.states)

    def test_discrimination_signature(self):
        disc = verify.fixture_discrimination()
        assert disc["frequency_ratio"] >= 2.0
        assert disc["cumulative_ratio"] >= 10.0
        assert disc["terminal_fraction"] >= 0.8

    def test_destabilized_beta_elevated_in_terminal_phase(self):
        _, destab = fixtures.synthetic_descent_pair()
        spec = fixtures.descent_norm_spec()
        ind = analyze_series(destab, spec, window=51)
        T = destab.times[-1]
        burst = ind.times >= 0.85 * T
        early = ind.times <= 0.5 * T
        assert np.median(ind.beta[burst]) > 10.0 * np.median(ind.beta[early])

    def test_csv_writer_roundtrip(self, tmp_path):
        stable_path, _ = fixtures.write_descent_pair(tmp_path)
        series = load_telemetry(stable_path)
        stable, _ = fixtures.synthetic_descent_pair()
        npt.assert_array_equal(series.states, stable.states)
        npt.assert_array_equal(series.times, stable.times)
