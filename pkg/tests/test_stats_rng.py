import numpy as np
import pytest

from radarkit.utils import rng
from radarkit.utils.stats import stable_mean, standard_error, wilson_interval


class TestWilsonInterval:
    """Intervalo de Wilson 95%"""

    def test_all_successes(self):
        lower, upper = wilson_interval(200, 200)
        assert upper == pytest.approx(1.0)
        assert lower == pytest.approx(0.98116, abs=1e-4)

    def test_no_successes(self):
        lower, upper = wilson_interval(0, 100)
        assert lower == pytest.approx(0.0, abs=1e-12)
        assert 0.0 < upper < 0.05

    def test_symmetric_at_half(self):
        lower, upper = wilson_interval(50, 100)
        assert 0.5 - lower == pytest.approx(upper - 0.5)

    def test_no_trials(self):
        assert wilson_interval(0, 0) == (0.0, 1.0)


class TestStats:
    def test_stable_mean(self):
        assert stable_mean([1e16, 1.0, -1e16]) == pytest.approx(1.0 / 3.0)
        assert np.isnan(stable_mean([]))

    def test_standard_error(self):
        assert standard_error([1.0, 3.0]) == pytest.approx(1.0)
        assert np.isnan(standard_error([1.0]))


class TestStreams:
    """Geradores chaveados"""

    def test_same_key_same_numbers(self):
        first = rng.stream(7, rng.STREAM_PROCESS_NOISE, 3).standard_normal(5)
        second = rng.stream(7, rng.STREAM_PROCESS_NOISE, 3).standard_normal(5)
        assert np.array_equal(first, second)

    def test_counters_separate_streams(self):
        first = rng.stream(7, rng.STREAM_CHANCE, 1, 0).standard_normal(5)
        second = rng.stream(7, rng.STREAM_CHANCE, 1, 1).standard_normal(5)
        other = rng.stream(7, rng.STREAM_OUR_NOISE, 1, 0).standard_normal(5)
        assert not np.array_equal(first, second)
        assert not np.array_equal(first, other)

    def test_large_seed_accepted(self):
        rng.stream(2 ** 64 - 1, rng.STREAM_DATASET).uniform()

    def test_derive_seed(self):
        assert rng.derive_seed(1, 2) == rng.derive_seed(1, 2)
        assert rng.derive_seed(1, 2) != rng.derive_seed(1, 3)
        assert 0 <= rng.derive_seed(5, 0) < 2 ** 64

    def test_chunk_bounds(self):
        assert rng.chunk_bounds(10, 4) == [(0, 4), (4, 8), (8, 10)]
        assert rng.chunk_bounds(0, 4) == []
