import math

import pytest
from numpy.testing import assert_allclose

from radarkit.models.statespace import GaussianBelief, LinearGaussianModel
from radarkit.models.tracking import FilterForm
from radarkit.services.tracker import gain_sequence, kalman_step, predicted_covariance_fixed_point
from radarkit.utils.errors import ConfigurationError, DivergenceError

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


class TestKalmanStep:
    """Passo do filtro clássico do adversário"""

    def test_hand_example(self):
        model = LinearGaussianModel.scalar(A=1.0, C=1.0, Q=0.0, R=1.0, allow_singular=True)
        step = kalman_step(model, GaussianBelief([0.0], [[1.0]]), [1.0])
        assert_allclose(step.predicted_cov, [[1.0]])
        assert_allclose(step.innovation_cov, [[2.0]])
        assert_allclose(step.gain, [[0.5]])
        assert_allclose(step.posterior.mean, [0.5])
        assert_allclose(step.posterior.cov, [[0.5]])

    def test_uninformative_observation(self):
        model = LinearGaussianModel.scalar(A=0.9, C=1.0, Q=1.0, R=1e12)
        belief = GaussianBelief([2.0], [[1.0]])
        step = kalman_step(model, belief, [50.0])
        assert abs(step.posterior.mean[0] - 0.9 * 2.0) < 1e-5

    def test_information_form_agrees(self):
        model = LinearGaussianModel(
            A=[[0.9, 0.1], [0.0, 0.8]], C=[[1.0, 0.5]], Q=[[1.0, 0.2], [0.2, 0.5]], R=[[0.7]],
            prior_mean=[0.3, -0.2], prior_cov=[[1.0, 0.1], [0.1, 2.0]],
        )
        belief = GaussianBelief.from_prior(model)
        cov_step = kalman_step(model, belief, [1.3], FilterForm.COVARIANCE)
        info_step = kalman_step(model, belief, [1.3], FilterForm.INFORMATION)
        assert_allclose(info_step.posterior.cov, cov_step.posterior.cov, rtol=1e-9)
        assert_allclose(info_step.posterior.mean, cov_step.posterior.mean, rtol=1e-9)
        assert_allclose(info_step.gain, cov_step.gain, rtol=1e-9)

    def test_observation_shape_checked(self, benchmark_model):
        with pytest.raises(ConfigurationError):
            kalman_step(benchmark_model, GaussianBelief.from_prior(benchmark_model), [1.0, 2.0])


class TestGainSequence:
    """Sequência determinística de ganhos e covariâncias"""

    def test_first_entries(self):
        model = LinearGaussianModel.scalar(A=1.0, C=2.0, Q=1.0, R=1.0)
        gains, covs, innovation_covs = gain_sequence(model, 3)
        assert_allclose(gains[0], [[4.0 / 9.0]])
        assert_allclose(covs[0], [[2.0 / 9.0]])
        assert_allclose(innovation_covs[0], [[9.0]])
        assert len(gains) == 3


class TestRiccatiFixedPoint:
    """Ponto fixo do preditor"""

    def test_golden_ratio(self):
        model = LinearGaussianModel.scalar(A=1.0, C=1.0, Q=1.0, R=1.0)
        P = predicted_covariance_fixed_point(model)
        assert_allclose(P, [[GOLDEN]], rtol=1e-9)

    def test_fixed_point_residual(self):
        model = LinearGaussianModel.scalar(A=1.0, C=1.0, Q=1.0, R=1.0)
        P = predicted_covariance_fixed_point(model)[0, 0]
        assert abs(P / (P + 1.0) + 1.0 - P) < 1e-9

    def test_no_process_noise_stable_dynamics(self):
        model = LinearGaussianModel.scalar(A=0.5, C=1.0, Q=0.0, R=1.0, prior_cov=3.0, allow_singular=True)
        assert_allclose(predicted_covariance_fixed_point(model), [[0.0]], atol=1e-10)

    def test_divergence_reported(self):
        model = LinearGaussianModel.scalar(A=1.0, C=1.0, Q=1.0, R=1.0)
        with pytest.raises(DivergenceError):
            predicted_covariance_fixed_point(model, tol=0.0, max_iter=5)
