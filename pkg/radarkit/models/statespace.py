from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from radarkit.utils.errors import ConfigurationError, ValidationError
from radarkit.utils.validators import MatrixValidator


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LinearGaussianModel:
    """Modelo linear gaussiano compartilhado por nós e pelo adversário

    x_{k+1} = A x_k + w_k,  w ~ N(0, Q)
    y_k     = C x_k + v_k,  v ~ N(0, R)
    x_0 ~ N(prior_mean, prior_cov)

    Q, R e prior_cov são validadas como positivas definidas. `allow_singular`
    relaxa isso para semi-definidas (casos limite sem ruído).
    """
    A: np.ndarray
    C: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    prior_mean: np.ndarray
    prior_cov: np.ndarray
    allow_singular: bool = False

    def __post_init__(self):
        A = MatrixValidator.as_matrix(self.A, "A")
        C = MatrixValidator.as_matrix(self.C, "C")
        Q = MatrixValidator.as_matrix(self.Q, "Q")
        R = MatrixValidator.as_matrix(self.R, "R")
        mean = MatrixValidator.as_vector(self.prior_mean, "prior_mean")
        cov = MatrixValidator.as_matrix(self.prior_cov, "prior_cov")

        x_dim = A.shape[0]
        MatrixValidator.require_shape(A, (x_dim, x_dim), "A")
        if C.shape[1] != x_dim:
            raise ConfigurationError(
                "C deve ter X colunas",
                {"C": [f"esperado (*, {x_dim}), recebido {C.shape}"]}
            )
        y_dim = C.shape[0]
        MatrixValidator.require_shape(Q, (x_dim, x_dim), "Q")
        MatrixValidator.require_shape(R, (y_dim, y_dim), "R")
        MatrixValidator.require_shape(mean, (x_dim,), "prior_mean")
        MatrixValidator.require_shape(cov, (x_dim, x_dim), "prior_cov")

        for name, mat in (("Q", Q), ("R", R), ("prior_cov", cov)):
            if self.allow_singular:
                mat = MatrixValidator.clamp_psd(mat, name)
            else:
                MatrixValidator.require_spd(mat, name)
            if name == "Q":
                Q = mat
            elif name == "R":
                R = mat
            else:
                cov = mat

        for name, value in (("A", A), ("C", C), ("Q", Q), ("R", R),
                            ("prior_mean", mean), ("prior_cov", cov)):
            object.__setattr__(self, name, _freeze(value))

    @property
    def x_dim(self) -> int:
        return self.A.shape[0]

    @property
    def y_dim(self) -> int:
        return self.C.shape[0]

    def with_gain(self, C: Any) -> "LinearGaussianModel":
        """Mesmo modelo com outro ganho de sensor (θ = C)"""
        return replace(self, C=np.asarray(C, dtype=float).reshape(self.C.shape))

    def with_noise(self, Q: Optional[Any] = None, R: Optional[Any] = None) -> "LinearGaussianModel":
        return replace(
            self,
            Q=self.Q if Q is None else np.asarray(Q, dtype=float).reshape(self.Q.shape),
            R=self.R if R is None else np.asarray(R, dtype=float).reshape(self.R.shape),
        )

    @classmethod
    def scalar(cls, A: float, C: float, Q: float, R: float,
               prior_mean: float = 0.0, prior_cov: float = 1.0,
               allow_singular: bool = False) -> "LinearGaussianModel":
        return cls(
            A=[[A]], C=[[C]], Q=[[Q]], R=[[R]],
            prior_mean=[prior_mean], prior_cov=[[prior_cov]],
            allow_singular=allow_singular,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "A": self.A.tolist(), "C": self.C.tolist(), "Q": self.Q.tolist(),
            "R": self.R.tolist(), "prior_mean": self.prior_mean.tolist(),
            "prior_cov": self.prior_cov.tolist(),
        }


@dataclass(frozen=True, eq=False)
class GaussianBelief:
    """Par média/covariância (x̂, Σ) ou, no filtro inverso, (x̂̂, Σ̄)"""
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = MatrixValidator.as_vector(self.mean, "mean")
        cov = MatrixValidator.as_matrix(self.cov, "cov")
        MatrixValidator.require_shape(cov, (mean.size, mean.size), "cov")
        cov = MatrixValidator.clamp_psd(cov, "cov")
        object.__setattr__(self, "mean", _freeze(mean))
        object.__setattr__(self, "cov", _freeze(cov))

    @classmethod
    def from_prior(cls, model: LinearGaussianModel) -> "GaussianBelief":
        return cls(model.prior_mean, model.prior_cov)


class PhiKind(str, Enum):
    IDENTITY = "identity"
    INVERSE_TRACE_SCALED = "inverse_trace_scaled"


@dataclass(frozen=True)
class ActionMap:
    """Mapa de ação a_k = φ(Σ_k) x̂_k + ε_k, ε ~ N(0, σ²_ε I)"""
    phi_kind: PhiKind = PhiKind.IDENTITY
    action_noise_var: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "phi_kind", PhiKind(self.phi_kind))
        value = float(self.action_noise_var)
        if not np.isfinite(value) or value < 0.0:
            raise ValidationError(
                "action_noise_var deve ser >= 0",
                {"action_noise_var": [f"recebido {self.action_noise_var}"]}
            )
        object.__setattr__(self, "action_noise_var", value)

    def phi(self, cov: np.ndarray) -> np.ndarray:
        """Matriz de ganho φ(Σ); sempre inversível para Σ PSD"""
        eye = np.eye(cov.shape[0])
        if self.phi_kind is PhiKind.IDENTITY:
            return eye
        return eye / (1.0 + float(np.trace(cov)))


@dataclass(frozen=True, eq=False)
class EngagementTrace:
    """Trajetória conjunta nós/adversário; sequências por passo têm tamanho N"""
    initial_state: np.ndarray
    states: np.ndarray
    observations: np.ndarray
    adversary_means: np.ndarray
    adversary_covs: np.ndarray
    actions: np.ndarray
    seed: int
    extras: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        arrays = {
            "states": np.asarray(self.states, dtype=float),
            "observations": np.asarray(self.observations, dtype=float),
            "adversary_means": np.asarray(self.adversary_means, dtype=float),
            "adversary_covs": np.asarray(self.adversary_covs, dtype=float),
            "actions": np.asarray(self.actions, dtype=float),
        }
        lengths = {name: arr.shape[0] for name, arr in arrays.items()}
        if len(set(lengths.values())) != 1:
            raise ValidationError(
                "Sequências da trajetória com tamanhos diferentes",
                {"lengths": lengths}
            )
        object.__setattr__(self, "initial_state", _freeze(MatrixValidator.as_vector(self.initial_state, "initial_state")))
        for name, arr in arrays.items():
            object.__setattr__(self, name, _freeze(arr))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def horizon(self) -> int:
        return int(self.states.shape[0])

    def __len__(self) -> int:
        return self.horizon
