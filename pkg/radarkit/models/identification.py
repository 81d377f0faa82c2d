from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


class EstimationMode(str, Enum):
    CLASSIC = "classic"
    INVERSE = "inverse"


@dataclass(frozen=True, eq=False)
class LikelihoodCurve:
    """ℓ(θ) sobre a grade de ganhos candidatos"""
    thetas: np.ndarray
    loglik: np.ndarray
    mode: EstimationMode
    innovations_last: Optional[np.ndarray] = None
    boundary_hit: bool = False

    @property
    def argmax(self) -> float:
        return float(self.thetas[int(np.argmax(self.loglik))])


@dataclass(frozen=True)
class SensitivityReport:
    eta_Q: float
    eta_R: float
    step_sizes: Tuple[float, float, float]
    mode: EstimationMode
    converged: bool = True
    eta_Q_halved: float = float("nan")
    eta_R_halved: float = float("nan")
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode.value,
            "eta_Q": self.eta_Q,
            "eta_R": self.eta_R,
            "eta_Q_halved": self.eta_Q_halved,
            "eta_R_halved": self.eta_R_halved,
            "step_sizes": {"h_theta": self.step_sizes[0], "h_Q": self.step_sizes[1], "h_R": self.step_sizes[2]},
            "converged": self.converged,
            "notes": list(self.notes),
        }
