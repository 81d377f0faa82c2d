import threading
import time

import pytest

from radarkit.services.ensemble_runner import EnsembleRunner
from radarkit.utils.errors import DivergenceError


class TestEnsembleRunner:
    """Execução paralela com ordem preservada"""

    def test_results_keep_item_order(self):
        runner = EnsembleRunner(max_workers=4)

        def slow_square(x):
            time.sleep(0.001 * (10 - x))
            return x * x

        assert runner.map(slow_square, range(10)) == [x * x for x in range(10)]

    def test_single_worker_matches_pool(self):
        items = list(range(20))
        assert EnsembleRunner(1).map(lambda x: x + 1, items) == EnsembleRunner(8).map(lambda x: x + 1, items)

    def test_empty_batch(self):
        assert EnsembleRunner(2).map(lambda x: x, []) == []

    def test_first_error_propagates_after_batch(self):
        runner = EnsembleRunner(max_workers=3)
        seen = []
        lock = threading.Lock()

        def work(x):
            with lock:
                seen.append(x)
            if x == 2:
                raise DivergenceError("falhou", {"item": x})
            return x

        with pytest.raises(DivergenceError):
            runner.map(work, range(6))
        assert sorted(seen) == list(range(6))
        status = runner.get_processing_status()
        assert status["failed_items"] == 1
        assert status["completed_items"] == 5
        assert status["active_batches"] == 0

    def test_configure_clamps_workers(self):
        runner = EnsembleRunner(4)
        runner.configure(0)
        assert runner.max_workers == 1
