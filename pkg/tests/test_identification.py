import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from radarkit.models.identification import EstimationMode
from radarkit.models.statespace import ActionMap, EngagementTrace, LinearGaussianModel, PhiKind
from radarkit.services.identification import (
    crb_gain,
    loglik_classic,
    loglik_grid,
    loglik_inverse,
    mean_curvature,
    mle_gain,
    recover_adversary_observations,
    sensitivity,
    simulate_ensemble,
)
from radarkit.services.simulation import simulate_engagement
from radarkit.utils.errors import ValidationError


def _empty_trace() -> EngagementTrace:
    return EngagementTrace(
        initial_state=[0.0], states=np.zeros((0, 1)), observations=np.zeros((0, 1)),
        adversary_means=np.zeros((0, 1)), adversary_covs=np.zeros((0, 1, 1)),
        actions=np.zeros((0, 1)), seed=0,
    )


class TestLikelihoods:
    """Log-verossimilhanças clássica e inversa"""

    def test_inverse_single_step_hand_value(self, hand_model):
        action_map = ActionMap(action_noise_var=0.5)
        trace = simulate_engagement(hand_model, action_map, horizon=1, seed=2)
        iota = trace.actions[0, 0] - 8.0 / 9.0 * trace.states[0, 0]
        S_bar = 16.0 / 81.0 + 0.5
        expected = -0.5 * math.log(2.0 * math.pi) - 0.5 * math.log(S_bar) - 0.5 * iota ** 2 / S_bar
        assert_allclose(loglik_inverse(hand_model, action_map, trace), expected, rtol=1e-12)

    @pytest.mark.parametrize("mode", [EstimationMode.CLASSIC, EstimationMode.INVERSE])
    @pytest.mark.parametrize("phi_kind", [PhiKind.IDENTITY, PhiKind.INVERSE_TRACE_SCALED])
    def test_grid_matches_matrix_path(self, benchmark_model, mode, phi_kind):
        action_map = ActionMap(phi_kind=phi_kind, action_noise_var=0.7)
        trace = simulate_engagement(benchmark_model, action_map, horizon=60, seed=13)
        thetas = [0.5, 1.7, 2.0, 4.2]
        batched = loglik_grid(benchmark_model, action_map, trace, thetas, mode)
        if mode is EstimationMode.CLASSIC:
            single = [loglik_classic(benchmark_model.with_gain(t), trace) for t in thetas]
        else:
            single = [loglik_inverse(benchmark_model.with_gain(t), action_map, trace) for t in thetas]
        assert_allclose(batched, single, rtol=1e-9)

    def test_noise_dominated_inverse_is_flat(self, benchmark_model):
        action_map = ActionMap(action_noise_var=1e12)
        trace = simulate_engagement(benchmark_model, action_map, horizon=20, seed=3)
        values = loglik_grid(benchmark_model, action_map, trace, np.linspace(0.1, 10.0, 50), EstimationMode.INVERSE)
        assert np.max(values) - np.min(values) < 1e-3

    def test_uninformative_classic_is_flat(self, identity_map):
        model = LinearGaussianModel.scalar(A=0.9, C=2.0, Q=1.0, R=1e12)
        trace = simulate_engagement(model, identity_map, horizon=100, seed=3)
        values = loglik_grid(model, identity_map, trace, np.linspace(0.1, 10.0, 50), EstimationMode.CLASSIC)
        assert np.max(values) - np.min(values) < 1e-3

    @pytest.mark.parametrize("mode", [EstimationMode.CLASSIC, EstimationMode.INVERSE])
    def test_empty_trace_rejected(self, benchmark_model, identity_map, mode):
        with pytest.raises(ValidationError):
            loglik_grid(benchmark_model, identity_map, _empty_trace(), [1.0], mode)


class TestMleGain:
    """MLE em grade com refinamento"""

    def test_boundary_hit_flagged(self, benchmark_model, identity_map):
        model = benchmark_model.with_gain(2.5)
        trace = simulate_engagement(model, identity_map, horizon=500, seed=0)
        theta, curve = mle_gain(trace, model, identity_map, EstimationMode.CLASSIC, grid=(0.01, 1.0, 100))
        assert curve.boundary_hit
        assert theta == pytest.approx(1.0)

    def test_classic_estimate_is_interior_and_refined(self, benchmark_model, identity_map):
        model = benchmark_model.with_gain(2.5)
        trace = simulate_engagement(model, identity_map, horizon=500, seed=4)
        theta, curve = mle_gain(trace, model, identity_map, EstimationMode.CLASSIC)
        assert not curve.boundary_hit
        assert abs(theta - curve.argmax) <= 0.01 + 1e-12
        assert curve.innovations_last.shape == (500, 1)

    def test_invalid_grid(self, benchmark_model, identity_map):
        trace = simulate_engagement(benchmark_model, identity_map, horizon=10, seed=0)
        with pytest.raises(ValidationError):
            mle_gain(trace, benchmark_model, identity_map, EstimationMode.CLASSIC, grid=(0.0, 1.0, 10))

    @pytest.mark.slow
    def test_classic_concentrates_near_truth(self, benchmark_model, identity_map):
        model = benchmark_model.with_gain(2.5)
        traces = simulate_ensemble(model, identity_map, horizon=500, ensemble_size=50, seed=0)
        estimates = [mle_gain(t, model, identity_map, EstimationMode.CLASSIC)[0] for t in traces]
        # desvio padrão próximo de √CRB ≈ 0.1 com N=500
        assert np.mean(np.abs(np.asarray(estimates) - 2.5) <= 0.3) >= 0.9

    @pytest.mark.slow
    def test_inverse_estimates_spread_more(self, benchmark_model, identity_map):
        model = benchmark_model.with_gain(2.5)
        traces = simulate_ensemble(model, identity_map, horizon=500, ensemble_size=50, seed=0)
        classic = [mle_gain(t, model, identity_map, EstimationMode.CLASSIC)[0] for t in traces]
        inverse = [mle_gain(t, model, identity_map, EstimationMode.INVERSE)[0] for t in traces]
        assert np.var(inverse, ddof=1) > np.var(classic, ddof=1)


class TestRecoverAdversaryObservations:
    """Identificabilidade sem ruído de ação"""

    def test_exact_recovery(self, benchmark_model):
        action_map = ActionMap(action_noise_var=0.0)
        trace = simulate_engagement(benchmark_model, action_map, horizon=50, seed=6)
        recovered = recover_adversary_observations(benchmark_model, action_map, trace)
        assert np.max(np.abs(recovered - trace.observations)) < 1e-8


class TestSensitivity:
    """Sensibilidades η_Q e η_R"""

    def test_report_fields(self, benchmark_model, identity_map):
        model = benchmark_model.with_gain(2.5)
        traces = simulate_ensemble(model, identity_map, horizon=100, ensemble_size=4, seed=1)
        report = sensitivity(model, identity_map, traces, EstimationMode.CLASSIC)
        assert math.isfinite(report.eta_Q) and math.isfinite(report.eta_R)
        assert math.isfinite(report.eta_Q_halved) and math.isfinite(report.eta_R_halved)
        assert report.step_sizes == pytest.approx((2.5e-3, 1e-3, 1e-3))
        assert report.converged == (not report.notes)
        assert report.to_dict()["mode"] == "classic"

    def test_empty_ensemble(self, benchmark_model, identity_map):
        with pytest.raises(ValidationError):
            sensitivity(benchmark_model, identity_map, [], EstimationMode.CLASSIC)

    def test_curvature_negative_at_truth(self, benchmark_model, identity_map):
        traces = simulate_ensemble(benchmark_model, identity_map, horizon=200, ensemble_size=10, seed=2)
        assert mean_curvature(benchmark_model, identity_map, traces, 2.0, 1e-3, EstimationMode.CLASSIC) < 0.0


class TestCrb:
    """Limite de Cramér-Rao por Monte Carlo"""

    def test_small_ensemble_rejected(self, benchmark_model, identity_map):
        with pytest.raises(ValidationError):
            crb_gain(benchmark_model, identity_map, EstimationMode.CLASSIC, ensemble_size=99, seed=0)

    def test_classic_bound_positive(self, benchmark_model, identity_map):
        bound = crb_gain(benchmark_model, identity_map, EstimationMode.CLASSIC, ensemble_size=100, seed=0, horizon=100)
        assert bound > 0.0

    @pytest.mark.slow
    @pytest.mark.parametrize("gain", [0.5, 1.5, 2.0, 3.0])
    def test_inverse_bound_exceeds_classic(self, benchmark_model, identity_map, gain):
        model = benchmark_model.with_gain(gain)
        classic = crb_gain(model, identity_map, EstimationMode.CLASSIC, ensemble_size=100, seed=0)
        inverse = crb_gain(model, identity_map, EstimationMode.INVERSE, ensemble_size=100, seed=0)
        assert inverse > classic

    @pytest.mark.slow
    def test_inverse_bound_shrinks_with_action_noise(self, benchmark_model):
        bounds = [
            crb_gain(benchmark_model, ActionMap(action_noise_var=noise), EstimationMode.INVERSE,
                     ensemble_size=100, seed=0)
            for noise in (1.0, 0.1, 0.01)
        ]
        assert bounds[0] > bounds[1] > bounds[2]

    def test_ensemble_is_reproducible(self, benchmark_model, identity_map):
        first = simulate_ensemble(benchmark_model, identity_map, horizon=20, ensemble_size=5, seed=3)
        second = simulate_ensemble(benchmark_model, identity_map, horizon=20, ensemble_size=5, seed=3)
        for a, b in zip(first, second):
            assert np.array_equal(a.observations, b.observations)
        assert not np.array_equal(first[0].observations, first[1].observations)
