from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from radarkit.utils.errors import ConfigurationError, ValidationError


def _as_channel_matrix(value: Any, name: str) -> np.ndarray:
    arr = np.asarray(value)
    if not np.iscomplexobj(arr):
        arr = arr.astype(float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ConfigurationError(f"{name} deve ser uma matriz", {name: [f"ndim {arr.ndim}"]})
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contém valores não finitos", {name: ["NaN ou infinito"]})
    return arr


class ProbeLag(str, Enum):
    ONE_STEP = "one_step"
    SIMULTANEOUS = "simultaneous"


class DesignStatus(str, Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True, eq=False)
class MimoChannel:
    """Canais no domínio da frequência, forma (JK) x (IJK)

    O termo de ruído do radar no denominador da SCNR é JK·σ̃²_r, com JK o
    número de linhas de H_t.
    """
    H_t: np.ndarray
    H_c: np.ndarray
    radar_noise_var: float = 1.0
    our_noise_var: float = 0.0
    dims: Optional[Tuple[int, int, int]] = None

    def __post_init__(self):
        H_t = _as_channel_matrix(self.H_t, "H_t")
        H_c = _as_channel_matrix(self.H_c, "H_c")
        if H_c.shape != H_t.shape:
            raise ConfigurationError(
                "H_t e H_c com formas diferentes",
                {"H_c": [f"esperado {H_t.shape}, recebido {H_c.shape}"]}
            )
        if self.dims is not None:
            I, J, K = (int(v) for v in self.dims)
            if H_t.shape != (J * K, I * J * K):
                raise ConfigurationError(
                    "Dimensões do canal incompatíveis com (I, J, K)",
                    {"dims": [f"esperado {(J * K, I * J * K)}, recebido {H_t.shape}"]}
                )
            object.__setattr__(self, "dims", (I, J, K))
        if not float(self.radar_noise_var) > 0.0:
            raise ValidationError("radar_noise_var deve ser > 0", {"radar_noise_var": [f"recebido {self.radar_noise_var}"]})
        if not float(self.our_noise_var) >= 0.0:
            raise ValidationError("our_noise_var deve ser >= 0", {"our_noise_var": [f"recebido {self.our_noise_var}"]})
        object.__setattr__(self, "H_t", H_t)
        object.__setattr__(self, "H_c", H_c)
        object.__setattr__(self, "radar_noise_var", float(self.radar_noise_var))
        object.__setattr__(self, "our_noise_var", float(self.our_noise_var))

    @property
    def receive_dim(self) -> int:
        return int(self.H_t.shape[0])

    @property
    def waveform_dim(self) -> int:
        return int(self.H_t.shape[1])

    @property
    def is_complex(self) -> bool:
        return bool(np.iscomplexobj(self.H_t) or np.iscomplexobj(self.H_c))


@dataclass(frozen=True, eq=False)
class ProbePlan:
    """Sequência de interferência H_p(l), l = 1..L

    ONE_STEP:     H_c(l) = H_c + H_p(l-1), H_p(0) = 0
    SIMULTANEOUS: H_c(l) = H_c + H_p(l)
    """
    probes: np.ndarray
    lag: ProbeLag = ProbeLag.ONE_STEP

    def __post_init__(self):
        probes = np.asarray(self.probes)
        if not np.iscomplexobj(probes):
            probes = probes.astype(float)
        if probes.ndim == 2:
            probes = probes[:, None, :]
        if probes.ndim != 3 or probes.shape[0] < 1:
            raise ConfigurationError("Plano de sondas deve ter L >= 1 matrizes", {"probes": [f"forma {probes.shape}"]})
        if not np.all(np.isfinite(probes)):
            raise ValidationError("Plano de sondas com valores não finitos", {"probes": ["NaN ou infinito"]})
        object.__setattr__(self, "probes", probes)
        object.__setattr__(self, "lag", ProbeLag(self.lag))

    @property
    def length(self) -> int:
        return int(self.probes.shape[0])

    def __len__(self) -> int:
        return self.length

    @property
    def power(self) -> float:
        """Σ_l ‖H_p(l)‖²_F"""
        return float(np.sum(np.abs(self.probes) ** 2))

    def clutter_at(self, channel: MimoChannel, pulse: int) -> np.ndarray:
        """H_c(l) efetivo no pulso l (base 1)"""
        if not 1 <= pulse <= self.length:
            raise ConfigurationError("Pulso fora do plano", {"pulse": [f"esperado 1..{self.length}, recebido {pulse}"]})
        if self.probes.shape[1:] != channel.H_c.shape:
            raise ConfigurationError(
                "Sondas incompatíveis com H_c",
                {"probes": [f"esperado {channel.H_c.shape}, recebido {self.probes.shape[1:]}"]}
            )
        if self.lag is ProbeLag.SIMULTANEOUS:
            return channel.H_c + self.probes[pulse - 1]
        if pulse == 1:
            return channel.H_c.copy()
        return channel.H_c + self.probes[pulse - 2]

    def constrained_pulses(self) -> List[int]:
        """Pulsos afetados por alguma sonda"""
        first = 1 if self.lag is ProbeLag.SIMULTANEOUS else 2
        return list(range(first, self.length + 1))

    @classmethod
    def scaled(cls, shapes: Any, r: float, lag: ProbeLag = ProbeLag.ONE_STEP) -> "ProbePlan":
        return cls(probes=float(r) * np.asarray(shapes), lag=lag)


@dataclass(frozen=True, eq=False)
class WaveformSolution:
    waveform: np.ndarray
    eigenvalue: float
    scnr_max: float
    degenerate: bool = False
    iterations: int = 0


@dataclass(frozen=True)
class ChanceSpec:
    delta: float
    epsilon: float
    mc_samples: int = 10_000
    seed: int = 0
    normalize: bool = False

    def __post_init__(self):
        if not float(self.delta) > 0.0:
            raise ValidationError("delta deve ser > 0", {"delta": [f"recebido {self.delta}"]})
        if not 0.0 <= float(self.epsilon) < 1.0:
            raise ValidationError("epsilon deve estar em [0, 1)", {"epsilon": [f"recebido {self.epsilon}"]})
        if int(self.mc_samples) < 100:
            raise ValidationError("mc_samples deve ser >= 100", {"mc_samples": [f"recebido {self.mc_samples}"]})


@dataclass(frozen=True)
class ChanceEstimate:
    """p̂ com o intervalo de Wilson 95%

    A viabilidade compara `lower` com 1 - ε. O intervalo de Wilson não é
    centrado em p̂, então `lower` difere de p̂ - ci_halfwidth.
    """
    p_hat: float
    ci_halfwidth: float
    lower: float
    upper: float
    samples: int


@dataclass(frozen=True, eq=False)
class PulseRecord:
    pulse: int
    clutter: np.ndarray
    solution: WaveformSolution
    observation: np.ndarray


@dataclass(frozen=True, eq=False)
class InterferenceDesign:
    status: DesignStatus
    r_star: Optional[float]
    plan: Optional[ProbePlan]
    objective: Optional[float]
    spec: ChanceSpec
    sweep: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "r_star": self.r_star,
            "objective": self.objective,
            "delta": self.spec.delta,
            "epsilon": self.spec.epsilon,
            "mc_samples": self.spec.mc_samples,
        }
