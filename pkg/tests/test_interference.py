import numpy as np
import pytest
from numpy.testing import assert_allclose

from radarkit.models.interference import ChanceSpec, DesignStatus, MimoChannel, ProbeLag, ProbePlan
from radarkit.services.interference import (
    chance_probability,
    design_interference,
    optimal_waveform,
    scnr,
    simulate_pulses,
)
from radarkit.utils.errors import ConfigurationError, ValidationError

REFERENCE_SCNR = 98.0 / 3.0
SHAPE = [[[1.0, 1.0]], [[1.0, 1.0]]]


def _random_instance(generator: np.random.Generator, rows: int, cols: int, complex_valued: bool):
    H_t = generator.standard_normal((rows, cols))
    H_c = generator.standard_normal((rows, cols))
    if complex_valued:
        H_t = H_t + 1j * generator.standard_normal((rows, cols))
        H_c = H_c + 1j * generator.standard_normal((rows, cols))
    return H_t, H_c


class TestScnr:
    """SCNR com termo de ruído JK·σ̃²_r"""

    def test_reference_value(self):
        w = np.array([1.0, 1.0]) / np.sqrt(2.0)
        assert scnr([[7.0, 7.0]], [[1.0, 1.0]], w, 1.0) == pytest.approx(REFERENCE_SCNR)

    def test_orthogonal_waveform(self):
        w = np.array([1.0, -1.0]) / np.sqrt(2.0)
        assert scnr([[7.0, 7.0]], [[1.0, 1.0]], w, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_clutter_free(self):
        w = np.array([1.0, 1.0]) / np.sqrt(2.0)
        assert scnr([[7.0, 7.0]], [[0.0, 0.0]], w, 1.0) == pytest.approx(98.0)


class TestOptimalWaveform:
    """Autoproblema generalizado da forma de onda"""

    def test_reference_solution(self):
        solution = optimal_waveform([[7.0, 7.0]], [[1.0, 1.0]], 1.0)
        assert_allclose(solution.waveform, np.array([1.0, 1.0]) / np.sqrt(2.0), rtol=1e-9)
        assert solution.eigenvalue == pytest.approx(REFERENCE_SCNR, rel=1e-9)
        assert solution.scnr_max == pytest.approx(REFERENCE_SCNR, rel=1e-9)
        assert not solution.degenerate

    def test_no_random_waveform_beats_optimum(self):
        generator = np.random.default_rng(3)
        H_t, H_c = _random_instance(generator, 3, 4, complex_valued=False)
        solution = optimal_waveform(H_t, H_c, 0.5)
        for w in generator.standard_normal((500, 4)):
            w = w / np.linalg.norm(w)
            assert scnr(H_t, H_c, w, 0.5) <= solution.scnr_max * (1.0 + 1e-9)

    @pytest.mark.parametrize("complex_valued", [False, True])
    def test_generalized_eigen_identity(self, complex_valued):
        generator = np.random.default_rng(17)
        for _ in range(10):
            H_t, H_c = _random_instance(generator, 3, 5, complex_valued)
            solution = optimal_waveform(H_t, H_c, 0.8)
            w = solution.waveform
            lhs = H_t.conj().T @ H_t @ w
            rhs = solution.eigenvalue * (H_c.conj().T @ H_c + 3 * 0.8 * np.eye(5)) @ w
            assert_allclose(lhs, rhs, rtol=1e-7, atol=1e-8)
            assert np.linalg.norm(w) == pytest.approx(1.0)
            assert solution.scnr_max == pytest.approx(solution.eigenvalue, rel=1e-8)

    def test_clutter_free_aligns_with_top_singular_vector(self):
        generator = np.random.default_rng(9)
        H_t = generator.standard_normal((3, 4))
        solution = optimal_waveform(H_t, np.zeros((3, 4)), 1.0)
        top = np.linalg.svd(H_t)[2][0]
        assert abs(float(top @ solution.waveform)) == pytest.approx(1.0, abs=1e-8)

    def test_shape_mismatch(self):
        with pytest.raises(ConfigurationError):
            optimal_waveform([[1.0, 1.0]], [[1.0, 1.0, 1.0]], 1.0)


class TestChannelAndPlan:
    """Canal MIMO e plano de sondas"""

    def test_dims_checked(self):
        with pytest.raises(ConfigurationError):
            MimoChannel(H_t=[[7.0, 7.0]], H_c=[[1.0, 1.0]], dims=(1, 1, 2))
        channel = MimoChannel(H_t=[[7.0, 7.0]], H_c=[[1.0, 1.0]], dims=(2, 1, 1))
        assert channel.dims == (2, 1, 1)

    def test_negative_noise_rejected(self):
        with pytest.raises(ValidationError):
            MimoChannel(H_t=[[7.0, 7.0]], H_c=[[1.0, 1.0]], our_noise_var=-0.1)

    def test_constrained_pulses(self):
        probes = np.zeros((3, 1, 2))
        assert ProbePlan(probes, ProbeLag.ONE_STEP).constrained_pulses() == [2, 3]
        assert ProbePlan(probes, ProbeLag.SIMULTANEOUS).constrained_pulses() == [1, 2, 3]

    def test_clutter_lags_one_pulse(self, reference_channel):
        probes = np.array([[[1.0, 0.0]], [[0.0, 2.0]], [[3.0, 3.0]]])
        plan = ProbePlan(probes, ProbeLag.ONE_STEP)
        assert_allclose(plan.clutter_at(reference_channel, 1), [[1.0, 1.0]])
        assert_allclose(plan.clutter_at(reference_channel, 3), [[1.0, 3.0]])
        simultaneous = ProbePlan(probes, ProbeLag.SIMULTANEOUS)
        assert_allclose(simultaneous.clutter_at(reference_channel, 1), [[2.0, 1.0]])

    def test_power(self):
        plan = ProbePlan.scaled(SHAPE, 2.0)
        assert plan.power == pytest.approx(16.0)


class TestSimulatePulses:
    """Dinâmica pulso a pulso"""

    def test_noise_free_observation_is_waveform(self):
        channel = MimoChannel(H_t=[[7.0, 7.0]], H_c=[[1.0, 1.0]], our_noise_var=0.0)
        for record in simulate_pulses(channel, ProbePlan.scaled(SHAPE, 1.0), seed=0):
            assert_allclose(record.observation, record.solution.waveform)

    def test_zero_plan_repeats_solution(self, reference_channel):
        records = simulate_pulses(reference_channel, ProbePlan(np.zeros((3, 1, 2))), seed=1)
        for record in records[1:]:
            assert_allclose(record.solution.waveform, records[0].solution.waveform)
            assert record.solution.scnr_max == pytest.approx(records[0].solution.scnr_max)

    def test_probe_degrades_next_pulse(self, reference_channel):
        records = simulate_pulses(reference_channel, ProbePlan.scaled(SHAPE, 10.0), seed=2)
        assert records[0].solution.scnr_max == pytest.approx(REFERENCE_SCNR)
        assert records[1].solution.scnr_max == pytest.approx(98.0 / 243.0)

    def test_reproducible(self, reference_channel):
        first = simulate_pulses(reference_channel, ProbePlan.scaled(SHAPE, 1.0), seed=5)
        second = simulate_pulses(reference_channel, ProbePlan.scaled(SHAPE, 1.0), seed=5)
        for a, b in zip(first, second):
            assert np.array_equal(a.observation, b.observation)


class TestChanceProbability:
    """Estimativa Monte Carlo da restrição de chance"""

    def test_deterministic_extremes(self):
        channel = MimoChannel(H_t=[[7.0, 7.0]], H_c=[[1.0, 1.0]], our_noise_var=0.0)
        plan = ProbePlan(np.zeros((1, 1, 2)))
        high = chance_probability(channel, plan, ChanceSpec(delta=100.0, epsilon=0.1, mc_samples=200), 1)
        low = chance_probability(channel, plan, ChanceSpec(delta=3.0, epsilon=0.1, mc_samples=200), 1)
        assert high.p_hat == 1.0
        assert low.p_hat == 0.0
        assert high.samples == 200

    def test_interval_contains_estimate(self, reference_channel):
        plan = ProbePlan.scaled(SHAPE, 2.0)
        estimate = chance_probability(reference_channel, plan, ChanceSpec(delta=3.0, epsilon=0.2, mc_samples=1000), 2)
        assert estimate.lower <= estimate.p_hat <= estimate.upper
        assert estimate.ci_halfwidth == pytest.approx(0.5 * (estimate.upper - estimate.lower))

    def test_mc_samples_floor(self):
        with pytest.raises(ValidationError):
            ChanceSpec(delta=3.0, epsilon=0.1, mc_samples=99)


class TestDesignInterference:
    """Menor nível de interferência que cumpre a restrição"""

    def test_loose_threshold_needs_no_interference(self, reference_channel):
        spec = ChanceSpec(delta=100.0, epsilon=0.1, mc_samples=200)
        design = design_interference(reference_channel, SHAPE, spec, r_grid=(0.0, 10.0, 11))
        assert design.status is DesignStatus.FEASIBLE
        assert design.r_star == 0.0
        assert design.objective == 0.0

    def test_tiny_threshold_is_infeasible(self, reference_channel):
        spec = ChanceSpec(delta=0.01, epsilon=0.1, mc_samples=200)
        design = design_interference(reference_channel, SHAPE, spec, r_grid=(0.0, 1.0, 2))
        assert design.status is DesignStatus.INFEASIBLE
        assert design.r_star is None and design.plan is None
        assert len(design.sweep) == 2

    def test_r_star_monotone_in_delta_and_epsilon(self, reference_channel):
        def r_star(delta, epsilon):
            spec = ChanceSpec(delta=delta, epsilon=epsilon, mc_samples=2000, seed=4)
            design = design_interference(reference_channel, SHAPE, spec, r_grid=(0.0, 100.0, 26))
            return np.inf if design.r_star is None else design.r_star

        for epsilon in (0.2, 0.3):
            values = [r_star(delta, epsilon) for delta in (2.8, 3.0, 3.2)]
            assert values[0] >= values[1] >= values[2]
        for delta in (2.8, 3.0, 3.2):
            assert r_star(delta, 0.2) >= r_star(delta, 0.3)

    def test_feasible_design_meets_constraint(self, reference_channel):
        spec = ChanceSpec(delta=3.0, epsilon=0.2, mc_samples=2000, seed=4)
        design = design_interference(reference_channel, SHAPE, spec, r_grid=(0.0, 100.0, 26))
        assert design.status is DesignStatus.FEASIBLE
        estimate = chance_probability(reference_channel, design.plan, spec, 2)
        assert estimate.lower >= 1.0 - spec.epsilon

    def test_no_constrained_pulse(self, reference_channel):
        spec = ChanceSpec(delta=3.0, epsilon=0.2, mc_samples=200)
        with pytest.raises(ConfigurationError):
            design_interference(reference_channel, [[[1.0, 1.0]]], spec, r_grid=(0.0, 1.0, 2))

    def test_zero_shape_rejected(self, reference_channel):
        spec = ChanceSpec(delta=3.0, epsilon=0.2, mc_samples=200)
        with pytest.raises(ValidationError):
            design_interference(reference_channel, [[[0.0, 0.0]], [[1.0, 1.0]]], spec, r_grid=(0.0, 1.0, 2))
