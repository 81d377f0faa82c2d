from dataclasses import dataclass
from enum import Enum

import numpy as np

from radarkit.models.statespace import GaussianBelief


class FilterForm(str, Enum):
    COVARIANCE = "covariance"
    INFORMATION = "information"


@dataclass(frozen=True, eq=False)
class KalmanStep:
    """Quantidades de um passo do filtro de Kalman do adversário"""
    predicted_cov: np.ndarray
    innovation_cov: np.ndarray
    gain: np.ndarray
    posterior: GaussianBelief
    innovation: np.ndarray


@dataclass(frozen=True, eq=False)
class InverseModelParams:
    """Parâmetros do sistema inverso no passo k

    A_bar = (I - ψ_{k+1} C) A, F_bar = ψ_{k+1} C, C_bar = φ(Σ_{k+1}),
    Q_bar = ψ R ψᵀ (ou ψ ψᵀ com paper_literal_qbar), R_bar = σ²_ε I.
    """
    A_bar: np.ndarray
    F_bar: np.ndarray
    C_bar: np.ndarray
    Q_bar: np.ndarray
    R_bar: np.ndarray
    gain: np.ndarray
    adversary_cov: np.ndarray


@dataclass(frozen=True, eq=False)
class ParticleCloud:
    particles: np.ndarray
    weights: np.ndarray
    ess: float
    resampled: bool = False

    @property
    def count(self) -> int:
        return int(self.particles.shape[0])

    @property
    def mean(self) -> np.ndarray:
        return self.weights @ self.particles

    @property
    def cov(self) -> np.ndarray:
        centered = self.particles - self.mean
        return (centered * self.weights[:, None]).T @ centered

    def standard_error(self) -> np.ndarray:
        """Erro padrão da média ponderada, via ESS"""
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None) / max(self.ess, 1.0))
