"""Geradores de dados sintéticos para os testes de racionalidade.

Um "respondedor" maximiza uma utilidade verdadeira conhecida sobre o conjunto
orçamentário de cada sonda; os conjuntos resultantes são racionais por
construção e servem de oráculo para GARP e Afriat.
"""
import logging
from typing import Any, List, Optional, Sequence, Union

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq, linprog, minimize

from radarkit.models.revealed import BudgetKind, BudgetSpec, CobbDouglas, Leontief, MinLinear, RPDataset
from radarkit.models.statespace import LinearGaussianModel
from radarkit.services.revealed import beam_probe
from radarkit.utils.errors import ConfigurationError, DivergenceError, ValidationError
from radarkit.utils.validators import MatrixValidator

logger = logging.getLogger(__name__)

Utility = Union[CobbDouglas, Leontief, MinLinear]

ASCENT_MAX_ITER = 1000
RAY_SEARCH_LIMIT = 200


def check_bounded(budget: BudgetSpec, probes: np.ndarray) -> None:
    """Orçamentos SINR só são limitados com δ < λ_min(P(α)⁻¹ Q)"""
    if budget.kind is not BudgetKind.SINR_QUADRATIC:
        return
    for n, alpha in enumerate(probes):
        lowest = float(eigh(budget.Q, budget.P(alpha), eigvals_only=True)[0])
        if not budget.delta < lowest:
            raise ValidationError(
                "Orçamento SINR ilimitado para a sonda",
                {"n": n, "delta": budget.delta, "lambda_min": lowest}
            )


def boundary_scale(budget: BudgetSpec, n: int, alpha: np.ndarray, direction: np.ndarray) -> float:
    """c > 0 com gₙ(c·d) = 0 ao longo do raio d ≥ 0"""
    direction = np.asarray(direction, dtype=float)
    if budget.kind is BudgetKind.LINEAR:
        return 1.0 / float(alpha @ direction)
    if budget.kind is BudgetKind.SINR_QUADRATIC:
        qd = float(direction @ budget.Q @ direction)
        pd = float(direction @ budget.P(alpha) @ direction)
        denominator = qd - budget.delta * pd
        if not denominator > 0.0:
            raise ValidationError(
                "Orçamento SINR ilimitado ao longo do raio",
                {"n": n, "direction": direction.tolist()}
            )
        return float(np.sqrt(budget.delta * budget.gamma / denominator))

    def along(c: float) -> float:
        return float(budget.evaluate(n, alpha, c * direction)[0])

    lo, hi = 1.0, 1.0
    for _ in range(RAY_SEARCH_LIMIT):
        if along(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise ValidationError("Orçamento ilimitado ao longo do raio", {"n": n})
    for _ in range(RAY_SEARCH_LIMIT):
        if along(lo) < 0.0:
            break
        lo /= 2.0
    else:
        raise ValidationError("Orçamento sem interior ao longo do raio", {"n": n})
    return float(brentq(along, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def _project(budget: BudgetSpec, n: int, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    return boundary_scale(budget, n, alpha, beta) * beta


def _cobb_douglas_ascent(budget: BudgetSpec, n: int, alpha: np.ndarray, utility: CobbDouglas,
                         max_iter: int) -> np.ndarray:
    """Subida de gradiente em log U com projeção radial na fronteira e backtracking"""
    beta = _project(budget, n, alpha, utility.weights / alpha)
    value = float(utility.weights @ np.log(beta))
    step = 0.1 * float(np.linalg.norm(beta))
    floor = 1e-13 * float(np.linalg.norm(beta))
    for iteration in range(max_iter):
        gradient = utility.log_gradient(beta)
        candidate = np.clip(beta + step * gradient / np.linalg.norm(gradient), 1e-12 * beta.max(), None)
        candidate = _project(budget, n, alpha, candidate)
        candidate_value = float(utility.weights @ np.log(candidate))
        if candidate_value > value:
            beta, value = candidate, candidate_value
            step *= 2.0
        else:
            step /= 2.0
        if step < floor:
            return beta
    raise DivergenceError(
        "Subida de gradiente não convergiu",
        {"n": n, "iterations": max_iter, "step": step, "log_utility": value}
    )


def _min_linear_program(alpha: np.ndarray, utility: MinLinear) -> np.ndarray:
    """max z s.a. z ≤ uⱼ + λⱼ aⱼᵀ(β - bⱼ), αᵀβ ≤ 1, β ≥ 0"""
    m = alpha.size
    slopes = utility.anchor_probes * utility.lam[:, None]
    offsets = utility.u - np.einsum("ji,ji->j", slopes, utility.anchor_responses)
    A_ub = np.vstack([np.hstack([-slopes, np.ones((slopes.shape[0], 1))]), np.append(alpha, 0.0)])
    b_ub = np.append(offsets, 1.0)
    c = np.append(np.zeros(m), -1.0)
    result = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(0.0, None)] * m + [(None, None)], method="highs-ds")
    if result.status != 0:
        raise DivergenceError("Programa linear do respondedor falhou", {"status": int(result.status)})
    beta = np.clip(result.x[:m], 0.0, None)
    return beta / float(alpha @ beta)


def _min_linear_slsqp(budget: BudgetSpec, n: int, alpha: np.ndarray, utility: MinLinear) -> np.ndarray:
    m = alpha.size
    start = 0.5 * _project(budget, n, alpha, np.ones(m))
    slopes = utility.anchor_probes * utility.lam[:, None]
    offsets = utility.u - np.einsum("ji,ji->j", slopes, utility.anchor_responses)
    constraints = [
        {"type": "ineq", "fun": lambda x: x[:m] @ slopes.T + offsets - x[m]},
        {"type": "ineq", "fun": lambda x: -budget.evaluate(n, alpha, x[:m])},
    ]
    result = minimize(
        lambda x: -x[m],
        np.append(start, float(utility(start))),
        method="SLSQP",
        bounds=[(0.0, None)] * m + [(None, None)],
        constraints=constraints,
        options={"maxiter": ASCENT_MAX_ITER, "ftol": 1e-12},
    )
    if not result.success:
        raise DivergenceError("Otimização do respondedor não convergiu", {"n": n, "message": str(result.message)})
    beta = np.clip(result.x[:m], 0.0, None)
    return _project(budget, n, alpha, beta)


def best_response(budget: BudgetSpec, n: int, alpha: np.ndarray, utility: Utility,
                  max_iter: int = ASCENT_MAX_ITER) -> np.ndarray:
    """Maximizador de utility em {β ≥ 0 : gₙ(β) ≤ 0} (α na forma canônica)"""
    if isinstance(utility, Leontief):
        return _project(budget, n, alpha, utility.weights)
    if isinstance(utility, CobbDouglas):
        if budget.is_linear:
            return (utility.weights / utility.weights.sum()) / alpha
        return _cobb_douglas_ascent(budget, n, alpha, utility, max_iter)
    if isinstance(utility, MinLinear):
        if budget.is_linear:
            return _min_linear_program(alpha, utility)
        return _min_linear_slsqp(budget, n, alpha, utility)
    raise ConfigurationError("Utilidade desconhecida", {"utility": [type(utility).__name__]})


def synth_responder(budget: BudgetSpec, utility: Utility, probes: Sequence[Any],
                    max_iter: int = ASCENT_MAX_ITER) -> RPDataset:
    """RPDataset cujas respostas maximizam a utilidade verdadeira em cada orçamento"""
    probes = MatrixValidator.as_matrix(probes, "probes")
    if not np.all(probes > 0.0):
        raise ValidationError("Sondas devem ser estritamente positivas", {"probes": ["componente <= 0"]})
    canonical = probes / budget.p_star if budget.is_linear else probes
    check_bounded(budget, canonical)
    responses = np.vstack([
        best_response(budget, n, alpha, utility, max_iter) for n, alpha in enumerate(canonical)
    ])
    logger.debug(f"Synthesized {probes.shape[0]} responses for {type(utility).__name__} on {budget.kind.value} budget")
    return RPDataset(probes=probes, responses=responses, budget=budget)


def beam_scenario(targets: Sequence[LinearGaussianModel], epochs: int, utility: Utility,
                  p_star: float = 1.0, base_noise: Optional[Sequence[Any]] = None) -> RPDataset:
    """Cenário em malha fechada de alocação de feixe

    A resposta βₙ₋₁ define o tempo de permanência em cada alvo, de modo que
    Rₙ(i) = R₀(i) / βₙ₋₁(i); a sonda αₙ vem de beam_probe com esses ruídos.
    β₀ é uniforme.
    """
    if int(epochs) < 1:
        raise ValidationError("epochs deve ser >= 1", {"epochs": [f"recebido {epochs}"]})
    targets = list(targets)
    m = len(targets)
    base = [t.R for t in targets] if base_noise is None else [MatrixValidator.as_matrix(r, "R0") for r in base_noise]
    budget = BudgetSpec.linear(p_star)

    allocation = np.full(m, p_star / m)
    probes: List[np.ndarray] = []
    responses: List[np.ndarray] = []
    for n in range(int(epochs)):
        if not np.all(allocation > 0.0):
            raise ValidationError(
                "Alocação de feixe nula torna o ruído de observação infinito",
                {"epoch": n, "allocation": allocation.tolist()}
            )
        dwell_models = [t.with_noise(R=base[i] / allocation[i]) for i, t in enumerate(targets)]
        alpha = beam_probe(dwell_models)
        allocation = best_response(budget, n, alpha / p_star, utility)
        probes.append(alpha)
        responses.append(allocation)
    logger.info(f"Beam scenario generated {epochs} epochs over {m} targets")
    return RPDataset(probes=np.vstack(probes), responses=np.vstack(responses), budget=budget)
