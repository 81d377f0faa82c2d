from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from radarkit.utils.errors import ConfigurationError, ValidationError
from radarkit.utils.validators import MatrixValidator, require_positive

BOUNDARY_TOL = 1e-6


class BudgetKind(str, Enum):
    LINEAR = "linear"
    SINR_QUADRATIC = "sinr_quadratic"
    CALLABLE = "callable"


@dataclass(frozen=True)
class DiagonalLoadingBuilder:
    """P(α) = diag(α) + loading·I"""
    loading: float = 0.01

    def __call__(self, alpha: np.ndarray) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        return np.diag(alpha) + self.loading * np.eye(alpha.size)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "diagonal_loading", "loading": self.loading}


def sinr_values(Q: np.ndarray, P_alpha: np.ndarray, gamma: float, betas: np.ndarray) -> np.ndarray:
    """βᵀQβ / (βᵀP(α)β + γ) para cada linha de betas"""
    betas = np.atleast_2d(betas)
    numerator = np.einsum("ki,ij,kj->k", betas, Q, betas)
    denominator = np.einsum("ki,ij,kj->k", betas, P_alpha, betas) + gamma
    return numerator / denominator


@dataclass(frozen=True, eq=False)
class BudgetSpec:
    """Restrição orçamentária g_n(β) ≤ 0, crescente em β

    LINEAR:          g_n(β) = αₙᵀβ - p_*   (p_* normalizado para 1 no RPDataset)
    SINR_QUADRATIC:  g_n(β) = SINR(αₙ, β) - δ
    CALLABLE:        g_n(β) = g(n, β), contrato do chamador
    """
    kind: BudgetKind
    p_star: float = 1.0
    Q: Optional[np.ndarray] = None
    P_builder: Callable[[np.ndarray], np.ndarray] = field(default_factory=DiagonalLoadingBuilder)
    gamma: float = 1.0
    delta: float = 1.0
    g: Optional[Callable[[int, np.ndarray], float]] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", BudgetKind(self.kind))
        if self.kind is BudgetKind.LINEAR:
            require_positive(self.p_star, "p_star")
        elif self.kind is BudgetKind.SINR_QUADRATIC:
            if self.Q is None:
                raise ConfigurationError("Orçamento SINR exige Q", {"Q": ["ausente"]})
            Q = MatrixValidator.as_matrix(self.Q, "Q")
            MatrixValidator.require_spd(Q, "Q")
            object.__setattr__(self, "Q", Q)
            require_positive(self.gamma, "gamma")
            require_positive(self.delta, "delta")
        elif self.g is None:
            raise ConfigurationError("Orçamento CALLABLE exige g", {"g": ["ausente"]})

    @classmethod
    def linear(cls, p_star: float = 1.0) -> "BudgetSpec":
        return cls(kind=BudgetKind.LINEAR, p_star=p_star)

    @classmethod
    def sinr(cls, Q: Any, gamma: float, delta: float,
             P_builder: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> "BudgetSpec":
        return cls(
            kind=BudgetKind.SINR_QUADRATIC,
            Q=np.asarray(Q, dtype=float),
            P_builder=P_builder or DiagonalLoadingBuilder(),
            gamma=gamma,
            delta=delta,
        )

    @classmethod
    def from_callable(cls, g: Callable[[int, np.ndarray], float]) -> "BudgetSpec":
        return cls(kind=BudgetKind.CALLABLE, g=g)

    @property
    def is_linear(self) -> bool:
        return self.kind is BudgetKind.LINEAR

    def P(self, alpha: np.ndarray) -> np.ndarray:
        return np.asarray(self.P_builder(np.asarray(alpha, dtype=float)), dtype=float)

    def evaluate(self, n: int, alpha: np.ndarray, betas: np.ndarray) -> np.ndarray:
        """g_n em cada linha de betas (α já na forma canônica)"""
        betas = np.atleast_2d(np.asarray(betas, dtype=float))
        if self.kind is BudgetKind.LINEAR:
            return betas @ alpha - 1.0
        if self.kind is BudgetKind.SINR_QUADRATIC:
            return sinr_values(self.Q, self.P(alpha), self.gamma, betas) - self.delta
        return np.array([float(self.g(n, beta)) for beta in betas])

    def to_dict(self) -> Dict[str, Any]:
        if self.kind is BudgetKind.LINEAR:
            return {"kind": self.kind.value, "p_star": self.p_star}
        if self.kind is BudgetKind.SINR_QUADRATIC:
            if not isinstance(self.P_builder, DiagonalLoadingBuilder):
                raise ConfigurationError(
                    "P_builder personalizado não é serializável",
                    {"P_builder": [type(self.P_builder).__name__]}
                )
            return {
                "kind": self.kind.value,
                "Q": self.Q.tolist(),
                "gamma": self.gamma,
                "delta": self.delta,
                "P_builder": self.P_builder.to_dict(),
            }
        raise ConfigurationError("Orçamento CALLABLE não é serializável", {"kind": [self.kind.value]})

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BudgetSpec":
        kind = BudgetKind(data.get("kind"))
        if kind is BudgetKind.LINEAR:
            return cls.linear(float(data.get("p_star", 1.0)))
        if kind is BudgetKind.SINR_QUADRATIC:
            builder = data.get("P_builder") or {}
            return cls.sinr(
                Q=data["Q"],
                gamma=float(data["gamma"]),
                delta=float(data["delta"]),
                P_builder=DiagonalLoadingBuilder(float(builder.get("loading", 0.01))),
            )
        raise ConfigurationError("Orçamento CALLABLE não é serializável", {"kind": [kind.value]})


@dataclass(frozen=True, eq=False)
class RPDataset:
    """Pares sonda/resposta (αₙ, βₙ) com o orçamento associado

    Sondas de orçamentos lineares são guardadas na forma canônica αₙ / p_*,
    com p_* = 1. Para orçamentos não lineares toda resposta deve estar na
    fronteira: |gₙ(βₙ)| ≤ 1e-6.
    """
    probes: np.ndarray
    responses: np.ndarray
    budget: BudgetSpec

    def __post_init__(self):
        probes = MatrixValidator.as_matrix(self.probes, "probes")
        responses = MatrixValidator.as_matrix(self.responses, "responses")
        if probes.shape[0] < 1:
            raise ValidationError("Conjunto de dados vazio", {"probes": ["N >= 1"]})
        MatrixValidator.require_shape(responses, probes.shape, "responses")
        if not np.all(probes > 0.0):
            raise ValidationError("Sondas devem ser estritamente positivas", {"probes": ["componente <= 0"]})
        if not np.all(responses >= 0.0):
            raise ValidationError("Respostas devem ser não negativas", {"responses": ["componente < 0"]})

        budget = self.budget
        if budget.is_linear and budget.p_star != 1.0:
            probes = probes / budget.p_star
            budget = BudgetSpec.linear(1.0)
        object.__setattr__(self, "probes", probes)
        object.__setattr__(self, "responses", responses)
        object.__setattr__(self, "budget", budget)

        if budget.kind is BudgetKind.SINR_QUADRATIC:
            MatrixValidator.require_shape(budget.Q, (self.dim, self.dim), "Q")
            for n, alpha in enumerate(probes):
                MatrixValidator.require_spd(budget.P(alpha), f"P(alpha_{n})")
        if not budget.is_linear:
            residuals = np.abs(self.boundary_residuals())
            worst = int(np.argmax(residuals))
            if residuals[worst] > BOUNDARY_TOL:
                raise ValidationError(
                    "Resposta fora da fronteira do orçamento",
                    {"n": worst, "residual": float(residuals[worst]), "tolerance": BOUNDARY_TOL}
                )

    @property
    def size(self) -> int:
        return int(self.probes.shape[0])

    @property
    def dim(self) -> int:
        return int(self.probes.shape[1])

    def __len__(self) -> int:
        return self.size

    def boundary_residuals(self) -> np.ndarray:
        return np.array([
            self.budget.evaluate(n, self.probes[n], self.responses[n])[0] for n in range(self.size)
        ])

    def slack(self, t: int, betas: np.ndarray) -> np.ndarray:
        """Folga do orçamento t: αₜᵀ(β - βₜ) no caso linear, gₜ(β) no não linear"""
        betas = np.atleast_2d(np.asarray(betas, dtype=float))
        if self.budget.is_linear:
            return (betas - self.responses[t]) @ self.probes[t]
        return self.budget.evaluate(t, self.probes[t], betas)

    def slack_matrix(self) -> np.ndarray:
        """M[t, s] = folga_t(β_s), com diagonal zero"""
        matrix = np.vstack([self.slack(t, self.responses) for t in range(self.size)])
        np.fill_diagonal(matrix, 0.0)
        return matrix


@dataclass(frozen=True, eq=False)
class AfriatCertificate:
    u: np.ndarray
    lam: np.ndarray
    residual: float

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if not np.all(lam > 0.0):
            raise ValidationError("λ deve ser estritamente positivo", {"lambda": lam.tolist()})
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))
        object.__setattr__(self, "lam", lam)

    def rescaled(self, scale: float, shift: float) -> "AfriatCertificate":
        """(c·u + d, c·λ), c > 0"""
        return AfriatCertificate(u=scale * self.u + shift, lam=scale * self.lam, residual=scale * self.residual)

    def to_dict(self) -> Dict[str, Any]:
        return {"u": self.u.tolist(), "lambda": self.lam.tolist(), "residual": self.residual}


@dataclass(frozen=True)
class GarpVerdict:
    passed: bool
    cycle: Tuple[int, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {"verdict": "pass" if self.passed else "fail", "cycle": list(self.cycle)}


@dataclass(frozen=True)
class RationalityVerdict:
    rational: bool
    certificate: Optional[AfriatCertificate] = None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"verdict": "rational" if self.rational else "irrational"}
        if self.certificate is not None:
            data["certificate"] = self.certificate.to_dict()
        return data


@dataclass(frozen=True)
class MonotonicityVerdict:
    """Condições suficientes, não necessárias: NOT_CERTIFIED não prova não-monotonia"""
    monotone: bool
    reason: Optional[str] = None
    condition: Optional[int] = None
    probe_index: Optional[int] = None
    entry: Optional[Tuple[int, int]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": "monotone" if self.monotone else "not_certified",
            "reason": self.reason,
            "condition": self.condition,
            "probe_index": self.probe_index,
            "entry": list(self.entry) if self.entry else None,
        }


@dataclass(frozen=True, eq=False)
class AfriatUtility:
    """U(β) = minₜ [uₜ + λₜ·folgaₜ(β)], monótona e côncava no caso linear"""
    dataset: RPDataset
    certificate: AfriatCertificate

    def __call__(self, betas: Any) -> Any:
        arr = np.asarray(betas, dtype=float)
        single = arr.ndim == 1
        arr = np.atleast_2d(arr)
        terms = np.vstack([
            self.certificate.u[t] + self.certificate.lam[t] * self.dataset.slack(t, arr)
            for t in range(self.dataset.size)
        ])
        values = terms.min(axis=0)
        return float(values[0]) if single else values


# Utilidades verdadeiras usadas pelo gerador sintético


@dataclass(frozen=True, eq=False)
class CobbDouglas:
    weights: np.ndarray

    def __post_init__(self):
        weights = MatrixValidator.as_vector(self.weights, "weights")
        if not np.all(weights > 0.0):
            raise ValidationError("Pesos devem ser > 0", {"weights": weights.tolist()})
        object.__setattr__(self, "weights", weights)

    def __call__(self, betas: Any) -> Any:
        arr = np.asarray(betas, dtype=float)
        with np.errstate(divide="ignore"):
            return np.exp(np.log(arr) @ self.weights)

    def log_gradient(self, beta: np.ndarray) -> np.ndarray:
        return self.weights / beta


@dataclass(frozen=True, eq=False)
class Leontief:
    weights: np.ndarray

    def __post_init__(self):
        weights = MatrixValidator.as_vector(self.weights, "weights")
        if not np.all(weights > 0.0):
            raise ValidationError("Pesos devem ser > 0", {"weights": weights.tolist()})
        object.__setattr__(self, "weights", weights)

    def __call__(self, betas: Any) -> Any:
        return np.min(np.asarray(betas, dtype=float) / self.weights, axis=-1)


@dataclass(frozen=True, eq=False)
class MinLinear:
    """U(β) = minⱼ [uⱼ + λⱼ aⱼᵀ(β - bⱼ)] sobre um conjunto de âncoras"""
    u: np.ndarray
    lam: np.ndarray
    anchor_probes: np.ndarray
    anchor_responses: np.ndarray

    def __post_init__(self):
        u = MatrixValidator.as_vector(self.u, "u")
        lam = MatrixValidator.as_vector(self.lam, "lam")
        probes = MatrixValidator.as_matrix(self.anchor_probes, "anchor_probes")
        responses = MatrixValidator.as_matrix(self.anchor_responses, "anchor_responses")
        MatrixValidator.require_shape(lam, u.shape, "lam")
        MatrixValidator.require_shape(probes, (u.size, probes.shape[1]), "anchor_probes")
        MatrixValidator.require_shape(responses, probes.shape, "anchor_responses")
        if not (np.all(lam > 0.0) and np.all(probes > 0.0)):
            raise ValidationError("λ e âncoras devem ser > 0", {"anchors": ["componente <= 0"]})
        for name, value in (("u", u), ("lam", lam), ("anchor_probes", probes), ("anchor_responses", responses)):
            object.__setattr__(self, name, value)

    def __call__(self, betas: Any) -> Any:
        arr = np.asarray(betas, dtype=float)
        offsets = self.u - self.lam * np.einsum("ji,ji->j", self.anchor_probes, self.anchor_responses)
        return np.min(arr @ (self.anchor_probes * self.lam[:, None]).T + offsets, axis=-1)
