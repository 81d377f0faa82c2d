"""Filtro de Kalman do adversário (formas covariância e informação) e
preditor de Riccati usado pela sonda de alocação de feixe."""
import logging
from typing import List, Tuple

import numpy as np

from radarkit.models.statespace import GaussianBelief, LinearGaussianModel
from radarkit.models.tracking import FilterForm, KalmanStep
from radarkit.utils.errors import DivergenceError
from radarkit.utils.validators import MatrixValidator, symmetrize

logger = logging.getLogger(__name__)

RICCATI_TOL = 1e-10
RICCATI_MAX_ITER = 100_000


def predict_cov(model: LinearGaussianModel, cov: np.ndarray) -> np.ndarray:
    return symmetrize(model.A @ cov @ model.A.T + model.Q)


def covariance_update(predicted_cov: np.ndarray, C: np.ndarray, R: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(S, ψ, Σ) da atualização na forma covariância

    Com Σ_{k+1|k} = 0 o estado é conhecido e o ganho é zero sem inverter S.
    """
    S = symmetrize(C @ predicted_cov @ C.T + R)
    if not np.any(predicted_cov):
        gain = np.zeros((predicted_cov.shape[0], C.shape[0]))
        return S, gain, predicted_cov.copy()
    S_inv = MatrixValidator.checked_inverse(S, "innovation_cov")
    gain = predicted_cov @ C.T @ S_inv
    posterior_cov = symmetrize(predicted_cov - gain @ C @ predicted_cov)
    return S, gain, posterior_cov


def information_update(predicted_cov: np.ndarray, C: np.ndarray, R: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mesma atualização na forma informação: Σ⁻¹ = Σ_{k+1|k}⁻¹ + Cᵀ R⁻¹ C, ψ = Σ Cᵀ R⁻¹"""
    S = symmetrize(C @ predicted_cov @ C.T + R)
    R_inv = MatrixValidator.checked_inverse(R, "R")
    P_inv = MatrixValidator.checked_inverse(predicted_cov, "predicted_cov")
    info = symmetrize(P_inv + C.T @ R_inv @ C)
    posterior_cov = symmetrize(MatrixValidator.checked_inverse(info, "information"))
    gain = posterior_cov @ C.T @ R_inv
    return S, gain, posterior_cov


def kalman_step(model: LinearGaussianModel, belief: GaussianBelief, observation,
                form: FilterForm = FilterForm.COVARIANCE) -> KalmanStep:
    """Um passo do filtro de Kalman clássico do adversário"""
    y = MatrixValidator.as_vector(observation, "observation")
    MatrixValidator.require_shape(y, (model.y_dim,), "observation")

    predicted_cov = predict_cov(model, belief.cov)
    update = information_update if FilterForm(form) is FilterForm.INFORMATION else covariance_update
    S, gain, posterior_cov = update(predicted_cov, model.C, model.R)

    predicted_mean = model.A @ belief.mean
    innovation = y - model.C @ predicted_mean
    posterior_mean = predicted_mean + gain @ innovation
    return KalmanStep(
        predicted_cov=predicted_cov,
        innovation_cov=S,
        gain=gain,
        posterior=GaussianBelief(posterior_mean, posterior_cov),
        innovation=innovation,
    )


def gain_sequence(model: LinearGaussianModel, horizon: int) -> Tuple[List[np.ndarray], List[np.ndarray], List[np.ndarray]]:
    """Sequências determinísticas (ψ_k, Σ_k, S_k), k = 1..horizon

    A covariância de Kalman não depende das observações, então é calculada
    uma vez e reutilizada por todos os filtros sobre o mesmo modelo.
    """
    gains, covs, innovation_covs = [], [], []
    cov = model.prior_cov
    for _ in range(horizon):
        predicted = predict_cov(model, cov)
        S, gain, cov = covariance_update(predicted, model.C, model.R)
        gains.append(gain)
        covs.append(cov)
        innovation_covs.append(S)
    return gains, covs, innovation_covs


def predicted_covariance_fixed_point(model: LinearGaussianModel, tol: float = RICCATI_TOL,
                                     max_iter: int = RICCATI_MAX_ITER) -> np.ndarray:
    """Ponto fixo do preditor de Riccati por substituição a partir de Σ = Q"""
    P = np.array(model.Q, dtype=float)
    for iteration in range(1, max_iter + 1):
        S, gain, posterior = covariance_update(P, model.C, model.R)
        P_next = predict_cov(model, posterior)
        if not np.all(np.isfinite(P_next)):
            break
        if np.linalg.norm(P_next - P, ord="fro") < tol:
            logger.debug(f"Riccati fixed point converged after {iteration} iterations")
            return P_next
        P = P_next
    raise DivergenceError(
        "Iteração de Riccati não convergiu",
        {"max_iter": max_iter, "tol": tol, "last_norm": float(np.linalg.norm(P, ord="fro"))}
    )
