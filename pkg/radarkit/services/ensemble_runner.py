import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional

from radarkit import settings
from radarkit.utils.errors import RadarkitError

logger = logging.getLogger(__name__)


class EnsembleRunner:
    """Executa membros independentes (traços, amostras, pontos de grade) em paralelo

    Os resultados voltam sempre na ordem dos itens; toda aleatoriedade é
    chaveada pelo índice do item, então o número de workers não muda nada.
    """

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max_workers or settings.RADARKIT_THREADS
        self.completed_items = 0
        self.failed_items = 0
        self.active_batches = 0
        self._lock = threading.Lock()

    def configure(self, max_workers: int) -> None:
        """Ajusta o limite de workers (RADARKIT_THREADS ou --threads)"""
        self.max_workers = max(1, int(max_workers))
        logger.info(f"Ensemble runner capped at {self.max_workers} workers")

    def map(self, fn: Callable[[Any], Any], items: Iterable[Any], label: str = "batch") -> List[Any]:
        """Aplica fn a cada item; o primeiro erro é propagado depois do lote terminar"""
        items = list(items)
        if not items:
            return []

        with self._lock:
            self.active_batches += 1
        logger.debug(f"Processing {label} with {len(items)} items on {self.max_workers} workers")

        try:
            if self.max_workers == 1 or len(items) == 1:
                outcomes = [self._run_item(fn, item, label, index) for index, item in enumerate(items)]
            else:
                with ThreadPoolExecutor(max_workers=min(self.max_workers, len(items))) as pool:
                    futures = [pool.submit(self._run_item, fn, item, label, index) for index, item in enumerate(items)]
                    outcomes = [future.result() for future in futures]
        finally:
            with self._lock:
                self.active_batches -= 1

        results = []
        for ok, value in outcomes:
            if not ok:
                raise value
            results.append(value)
        return results

    def _run_item(self, fn: Callable[[Any], Any], item: Any, label: str, index: int):
        try:
            value = fn(item)
        except RadarkitError as e:
            self._count(failed=True)
            logger.error(f"Error processing {label} item {index}: {e.message}")
            return False, e
        except Exception as e:
            self._count(failed=True)
            logger.error(f"Error processing {label} item {index}: {e}")
            return False, e
        self._count(failed=False)
        return True, value

    def _count(self, failed: bool) -> None:
        with self._lock:
            if failed:
                self.failed_items += 1
            else:
                self.completed_items += 1

    def get_processing_status(self) -> Dict[str, Any]:
        """Retorna status do executor"""
        return {
            "max_workers": self.max_workers,
            "active_batches": self.active_batches,
            "completed_items": self.completed_items,
            "failed_items": self.failed_items,
        }


# Instância global do executor
ensemble_runner = EnsembleRunner()
