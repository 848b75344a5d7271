import numpy as np
import numpy.testing as npt
import pytest

from stochstab import verify
from stochstab.indicators import (
    alpha,
    alpha_beta,
    beta,
    check_sufficient_condition,
    empirical_log_growth,
    p1_local_condition,
    trajectory_tube_domain,
)
from stochstab.lognorm import SamplingBudget
from stochstab.models import gbm, lander3dof, ou
from stochstab.norms import (
    NormFloorError,
    UnsupportedOrderError,
    WeightedNormSpec,
    ZeroComponentError,
)
from stochstab.sde import SdeModel, simulate_coupled, simulate_ensemble

SPEC1 = WeightedNormSpec.ones(1)
BUDGET = SamplingBudget(base_points=16, directions=16, seed=0)


def zero_model(n=1):
    return SdeModel(
        n=n, m=0,
        drift=lambda x, t: np.zeros_like(np.asarray(x, dtype=float)),
        diffusion=(),
        lower=-np.ones(n), upper=np.ones(n),
        label="zero", vectorized=True,
    )


def two_channel_gbm(b1=0.3, b2=0.4):
    return SdeModel(
        n=1, m=2,
        drift=lambda x, t: 0.0 * np.asarray(x, dtype=float),
        diffusion=(
            lambda x, t: b1 * np.asarray(x, dtype=float),
            lambda x, t: b2 * np.asarray(x, dtype=float),
        ),
        lower=np.array([0.5]), upper=np.array([2.0]),
        label="two-channel", vectorized=True,
        drift_affine=(np.zeros((1, 1)), np.zeros(1)),
        diffusion_affine=((np.array([[b1]]), np.zeros(1)),
                          (np.array([[b2]]), np.zeros(1))),
    )


class TestAlpha:
    def test_gbm_decomposition(self):
        # mu(f) = a, mu'(b) = b^2/2, (p/2) mu(-b) mu(b) = -b^2
        rep = alpha(gbm(0.1, 0.3), SPEC1, BUDGET)
        assert rep.alpha == pytest.approx(0.055, abs=1e-12)
        assert rep.mu_drift == pytest.approx(0.1, abs=1e-12)
        c = rep.channels[0]
        assert c.mu_prime == pytest.approx(0.045, abs=1e-12)
        assert c.mu_plus == pytest.approx(0.3, abs=1e-12)
        assert c.mu_minus == pytest.approx(-0.3, abs=1e-12)

    def test_gbm_sampled_matches(self):
        rep = alpha_beta(gbm(0.1, 0.3), SPEC1, BUDGET, delegate=False)
        assert rep.alpha == pytest.approx(0.055, abs=1e-3)

    def test_ou_additive_channels_vanish(self):
        rep = alpha(ou(1.0, 0.7), SPEC1, BUDGET)
        assert rep.alpha == pytest.approx(-1.0, abs=1e-12)
        assert all(c.mu_prime == 0 and c.mu_plus == 0 and c.mu_minus == 0
                   for c in rep.channels)

    def test_zero_model(self):
        rep = alpha(zero_model(), SPEC1, BUDGET)
        assert rep.alpha == 0.0

    def test_p_restriction_with_channels(self):
        with pytest.raises(UnsupportedOrderError):
            alpha_beta(gbm(), WeightedNormSpec.ones(1, p=1.0), BUDGET)

    def test_deterministic_model_any_p(self):
        rep = alpha_beta(zero_model(), WeightedNormSpec.ones(1, p=1.0), BUDGET)
        assert rep.alpha == 0.0


class TestBeta:
    def test_gbm(self):
        assert beta(gbm(0.1, 0.3), SPEC1, BUDGET) == pytest.approx(0.09, abs=1e-12)

    def test_additive_noise_zero(self):
        assert beta(ou(1.0, 0.5), SPEC1, BUDGET) == 0.0

    def test_two_channels_sum_of_squares(self):
        assert beta(two_channel_gbm(0.3, 0.4), SPEC1, BUDGET) == pytest.approx(
            0.25, abs=1e-12
        )

    def test_sign_symmetric_in_channel(self):
        # flipping the channel sign must not change beta
        plus = two_channel_gbm(0.3, 0.4)
        minus = two_channel_gbm(-0.3, -0.4)
        assert beta(plus, SPEC1, BUDGET) == beta(minus, SPEC1, BUDGET)


class TestSufficientCondition:
    def test_growing_gbm(self):
        res = check_sufficient_condition(alpha(gbm(0.1, 0.3), SPEC1, BUDGET))
        assert not res.satisfied
        assert res.margin == pytest.approx(-0.055, abs=1e-12)

    def test_contracting_gbm(self):
        res = check_sufficient_condition(alpha(gbm(-0.1, 0.3), SPEC1, BUDGET))
        assert res.satisfied
        assert res.margin == pytest.approx(0.145, abs=1e-12)

    def test_zero_model_boundary_inclusive(self):
        res = check_sufficient_condition(alpha(zero_model(), SPEC1, BUDGET))
        assert res.satisfied and res.margin == 0.0
        assert res.diffusion_free_lhs == 0.0

    def test_diffusion_free_reduction_for_additive(self):
        res = check_sufficient_condition(alpha(ou(2.0, 0.5), SPEC1, BUDGET))
        assert res.diffusion_free_lhs == pytest.approx(-2.0, abs=1e-12)


class TestP1Local:
    def test_gbm_recovers_rate(self):
        spec = WeightedNormSpec.ones(1, p=1.0)
        res = p1_local_condition(gbm(0.1, 0.3), spec, x=[1.2], delta=[0.05])
        assert res.lhs == pytest.approx(0.1 - 0.045, rel=1e-12)
        assert not res.satisfied

    def test_zero_model(self):
        spec = WeightedNormSpec.ones(2, p=1.0)
        res = p1_local_condition(zero_model(2), spec, x=[0.1, 0.2],
                                 delta=[0.01, -0.02])
        assert res.lhs == 0.0 and res.satisfied

    def test_ou_additive(self):
        spec = WeightedNormSpec.ones(1, p=1.0)
        res = p1_local_condition(ou(1.0, 0.5), spec, x=[0.3], delta=[0.01])
        assert res.lhs == pytest.approx(-1.0, rel=1e-12)

    def test_zero_component_rejected(self):
        spec = WeightedNormSpec.ones(2, p=1.0)
        with pytest.raises(ZeroComponentError):
            p1_local_condition(zero_model(2), spec, x=[0.1, 0.2],
                               delta=[0.01, 0.0])

    def test_requires_p1(self):
        with pytest.raises(UnsupportedOrderError):
            p1_local_condition(gbm(), SPEC1, x=[1.0], delta=[0.01])


class TestEmpiricalLogGrowth:
    def test_constant_perturbation_gives_zeros(self):
        traj = simulate_coupled(zero_model(2), [0.0, 0.0], [1e-3, 1e-3],
                                T=0.1, dt=1e-2, seed=0)
        y = empirical_log_growth(traj, WeightedNormSpec.ones(2))
        npt.assert_array_equal(y, np.zeros(10))

    def test_ou_exact_contraction(self):
        dt = 1e-3
        traj = simulate_coupled(ou(1.0, 0.5), [0.2], [1e-3], T=0.5, dt=dt, seed=1)
        y = empirical_log_growth(traj, SPEC1)
        assert np.max(np.abs(y + dt)) < 1e-6

    def test_gbm_ensemble_mean(self):
        ens = simulate_ensemble(gbm(0.1, 0.3), [1.0], [1e-4], T=1.0, dt=1e-2,
                                n_paths=2000, seed=2)
        rates = ens.path_mean_rates()
        se = rates.std(ddof=1) / np.sqrt(len(rates))
        assert abs(rates.mean() - 0.055) < 3 * se + 1e-3

    def test_floor_reported_with_index(self):
        traj = simulate_coupled(zero_model(1), [0.0], [1e-3], T=0.1, dt=1e-2, seed=3)
        traj.perturbed[5] = traj.base[5]  # collapse one step
        with pytest.raises(NormFloorError, match="step 5"):
            empirical_log_growth(traj, SPEC1)


class TestBoundValidity:
    @pytest.mark.parametrize("name", ["gbm", "ou", "lander3dof"])
    def test_mean_bound(self, name):
        model, x0, d0 = {
            "gbm": (gbm(0.1, 0.3), [1.0], [1e-4]),
            "ou": (ou(1.0, 0.5), [0.5], [1e-3]),
            "lander3dof": (lander3dof(), [500.0, 400.0, 1200.0, -15.0, -10.0, -40.0],
                           [1.0, 1.0, 1.0, 0.01, 0.01, 0.01]),
        }[name]
        gap, tol = verify.mean_bound_gap(model, x0, d0, seed=31, n_paths=1000)
        assert gap <= tol

    @pytest.mark.parametrize("name", ["gbm", "ou", "lander3dof"])
    def test_variance_bound(self, name):
        model, x0, d0 = {
            "gbm": (gbm(0.1, 0.3), [1.0], [1e-4]),
            "ou": (ou(1.0, 0.5), [0.5], [1e-3]),
            "lander3dof": (lander3dof(), [500.0, 400.0, 1200.0, -15.0, -10.0, -40.0],
                           [1.0, 1.0, 1.0, 0.01, 0.01, 0.01]),
        }[name]
        gap, tol = verify.variance_bound_gap(model, x0, d0, seed=37, n_paths=1000)
        assert gap <= tol

    def test_disturbance_decoupling(self):
        assert verify.disturbance_decoupling_ratio(seed=41) < 1e-3

    def test_report_self_consistency(self):
        assert verify.report_consistency_error(seed=43) <= 1e-12


class TestDomains:
    def test_trajectory_tube(self):
        traj = simulate_coupled(gbm(0.1, 0.3), [1.0], [1e-4], T=0.5, dt=1e-2, seed=5)
        lo, hi = trajectory_tube_domain(traj, inflate=0.1)
        pts = np.vstack([traj.base, traj.perturbed])
        assert np.all(pts >= lo) and np.all(pts <= hi)
        span = hi - lo
        raw = pts.max(axis=0) - pts.min(axis=0)
        npt.assert_allclose(span, raw * 1.2, rtol=1e-12)

    def test_tube_domain_usable_for_alpha(self):
        traj = simulate_coupled(gbm(0.1, 0.3), [1.0], [1e-4], T=0.5, dt=1e-2, seed=6)
        domain = trajectory_tube_domain(traj)
        rep = alpha_beta(gbm(0.1, 0.3), SPEC1, BUDGET, domain=domain, delegate=False)
        assert rep.alpha == pytest.approx(0.055, abs=1e-3)

    def test_report_to_dict(self):
        rep = alpha_beta(gbm(0.1, 0.3), SPEC1, BUDGET)
        d = rep.to_dict()
        assert d["alpha"] == rep.alpha
        assert d["channels"][0]["mu_plus"] == rep.channels[0].mu_plus
        assert d["budget"]["base_points"] == BUDGET.base_points
