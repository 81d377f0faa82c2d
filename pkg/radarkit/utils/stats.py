import math
from typing import Sequence, Tuple

import numpy as np
from scipy import stats


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Intervalo de Wilson para proporção binomial"""
    if trials <= 0:
        return 0.0, 1.0
    z = float(stats.norm.ppf(0.5 + confidence / 2.0))
    p_hat = successes / trials
    denominator = 1.0 + z ** 2 / trials
    center = (p_hat + z ** 2 / (2.0 * trials)) / denominator
    margin = (z / denominator) * math.sqrt(p_hat * (1.0 - p_hat) / trials + z ** 2 / (4.0 * trials ** 2))
    return max(0.0, center - margin), min(1.0, center + margin)


def stable_mean(values: Sequence[float]) -> float:
    """Média com soma exata (independente da ordem)"""
    values = list(values)
    if not values:
        return float("nan")
    return math.fsum(values) / len(values)


def standard_error(values: Sequence[float]) -> float:
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        return float("nan")
    return float(np.std(arr, ddof=1) / math.sqrt(arr.size))
