"""Testes de preferência revelada sobre a alocação de recursos do radar.

GARP por fechamento transitivo (Warshall), viabilidade de Afriat por programação
linear, reconstrução da utilidade, generalização para orçamentos não lineares,
o orçamento SINR com as condições suficientes de monotonia e a sonda de
alocação de feixe.
"""
import logging
from collections import deque
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from radarkit.models.revealed import (
    AfriatCertificate,
    AfriatUtility,
    GarpVerdict,
    MonotonicityVerdict,
    RationalityVerdict,
    RPDataset,
    sinr_values,
)
from radarkit.models.statespace import LinearGaussianModel
from radarkit.services.tracker import predicted_covariance_fixed_point
from radarkit.utils.errors import ConfigurationError, IndeterminateError
from radarkit.utils.validators import MatrixValidator, require_positive

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12
CERTIFICATE_TOL = 1e-9
OFF_DIAGONAL_TOL = 1e-12


def _transitive_closure(relation: np.ndarray) -> np.ndarray:
    """Warshall, O(N³)"""
    closure = relation.copy()
    for k in range(closure.shape[0]):
        closure |= np.outer(closure[:, k], closure[k, :])
    return closure


def _path(relation: np.ndarray, start: int, goal: int) -> List[int]:
    parents = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nxt in np.flatnonzero(relation[node]):
            nxt = int(nxt)
            if nxt not in parents:
                parents[nxt] = node
                queue.append(nxt)
    path = [goal]
    while parents[path[-1]] is not None:
        path.append(parents[path[-1]])
    return path[::-1]


def _garp_from_slack(slack: np.ndarray) -> GarpVerdict:
    """t R s sse folga_t(β_s) ≤ 0; falha se t R* s e folga_s(β_t) < 0"""
    direct = slack <= TIE_TOL
    strict_reverse = (slack < -TIE_TOL).T
    violations = _transitive_closure(direct) & strict_reverse
    if not np.any(violations):
        return GarpVerdict(passed=True)
    t, s = (int(i) for i in np.argwhere(violations)[0])
    cycle = tuple(_path(direct, t, s) + [t])
    return GarpVerdict(passed=False, cycle=cycle)


def garp_check(dataset: RPDataset) -> GarpVerdict:
    """GARP para orçamentos lineares; o ciclo testemunha usa índices base 0"""
    if not dataset.budget.is_linear:
        raise ConfigurationError(
            "garp_check exige orçamento linear",
            {"budget": [dataset.budget.kind.value]}
        )
    verdict = _garp_from_slack(dataset.slack_matrix())
    logger.debug(f"GARP on {dataset.size} observations: {'pass' if verdict.passed else 'fail'}")
    return verdict


def nonlinear_garp(dataset: RPDataset) -> GarpVerdict:
    """GARP com orçamentos gₙ(β) ≤ 0 crescentes em β

    A invariante de fronteira |gₙ(βₙ)| ≤ 1e-6 é verificada na construção do RPDataset.
    """
    return _garp_from_slack(dataset.slack_matrix())


def certificate_residual(dataset: RPDataset, u: np.ndarray, lam: np.ndarray) -> float:
    """max_{s≠t} [u_s - u_t - λ_t·folga_t(β_s)]"""
    if dataset.size == 1:
        return 0.0
    slack = dataset.slack_matrix()
    gaps = u[None, :] - u[:, None] - lam[:, None] * slack
    np.fill_diagonal(gaps, -np.inf)
    return float(np.max(gaps))


def _potentials(weights: np.ndarray) -> Optional[np.ndarray]:
    """u com u_s ≤ u_t + W[t, s] por caminhos mínimos; None se houver ciclo negativo"""
    dist = weights.copy()
    for k in range(dist.shape[0]):
        dist = np.minimum(dist, dist[:, k:k + 1] + dist[k:k + 1, :])
    if np.any(np.diag(dist) < 0.0):
        return None
    return np.minimum(0.0, dist.min(axis=0))


def afriat_feasibility(dataset: RPDataset) -> RationalityVerdict:
    """Decide as desigualdades de Afriat em (u, λ) com λ_t ≥ 1

    O λ vem do programa linear; u é recalculado exatamente por caminhos
    mínimos sobre W[t, s] = λ_t·folga_t(β_s), o que leva o resíduo ao nível
    de arredondamento.
    """
    N = dataset.size
    slack = dataset.slack_matrix()

    rows, b_ub = [], []
    for t in range(N):
        for s in range(N):
            if s == t:
                continue
            row = np.zeros(2 * N)
            row[s] += 1.0
            row[t] -= 1.0
            row[N + t] = -slack[t, s]
            rows.append(row)
            b_ub.append(0.0)

    c = np.concatenate([np.zeros(N), np.ones(N)])
    bounds = [(None, None)] * N + [(1.0, None)] * N
    result = linprog(
        c,
        A_ub=np.vstack(rows) if rows else None,
        b_ub=np.array(b_ub) if rows else None,
        bounds=bounds,
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if result.status == 2:
        logger.info(f"Afriat inequalities infeasible on {N} observations")
        return RationalityVerdict(rational=False)
    if result.status != 0:
        raise IndeterminateError(
            "Solver de programação linear sem veredito",
            {"status": int(result.status), "message": str(result.message)}
        )

    lam = np.asarray(result.x[N:], dtype=float)
    u = _potentials(lam[:, None] * slack)
    if u is None:
        u = np.asarray(result.x[:N], dtype=float)
    u = u - u.min() + 1.0
    residual = certificate_residual(dataset, u, lam)
    if residual > CERTIFICATE_TOL:
        raise IndeterminateError(
            "Certificado de Afriat com resíduo acima da tolerância",
            {"residual": residual, "tolerance": CERTIFICATE_TOL}
        )
    return RationalityVerdict(rational=True, certificate=AfriatCertificate(u=u, lam=lam, residual=residual))


def construct_utility(dataset: RPDataset, certificate: AfriatCertificate) -> AfriatUtility:
    """U(β) = minₜ [uₜ + λₜ·folgaₜ(β)], avaliador puro"""
    if certificate.u.shape != (dataset.size,) or certificate.lam.shape != (dataset.size,):
        raise ConfigurationError(
            "Certificado incompatível com o conjunto de dados",
            {"certificate": [f"esperado N={dataset.size}, recebido {certificate.u.shape}"]}
        )
    return AfriatUtility(dataset=dataset, certificate=certificate)


def sinr_value(Q, P_alpha, gamma: float, beta) -> float:
    """βᵀQβ / (βᵀP(α)β + γ)"""
    gamma = require_positive(gamma, "gamma")
    Q = MatrixValidator.as_matrix(Q, "Q")
    P_alpha = MatrixValidator.as_matrix(P_alpha, "P_alpha")
    beta = MatrixValidator.as_vector(beta, "beta")
    return float(sinr_values(Q, P_alpha, gamma, beta[None, :])[0])


def budget_gradient_oracle(Q, P_alpha, gamma: float, betas, step: float = 1e-6) -> np.ndarray:
    """Gradiente de SINR(α, β) - δ por diferenças centrais, uma linha por β"""
    gamma = require_positive(gamma, "gamma")
    Q = MatrixValidator.as_matrix(Q, "Q")
    P_alpha = MatrixValidator.as_matrix(P_alpha, "P_alpha")
    betas = np.atleast_2d(np.asarray(betas, dtype=float))
    gradient = np.empty_like(betas)
    for i in range(betas.shape[1]):
        shift = np.zeros(betas.shape[1])
        shift[i] = step
        up = sinr_values(Q, P_alpha, gamma, betas + shift)
        down = sinr_values(Q, P_alpha, gamma, betas - shift)
        gradient[:, i] = (up - down) / (2.0 * step)
    return gradient


def thm4_monotonicity_check(Q, P_alphas: Sequence, relaxed: bool = False) -> MonotonicityVerdict:
    """Condições suficientes para monotonia do orçamento SINR

    (1) Q diagonal; (2) para cada n, com c = λ_min(P(αₙ)) e d = λ_max(Q), toda
    entrada de (c/d)·P(αₙ) - Q é < 0. Em modo relaxado as entradas fora da
    diagonal podem ser iguais a 0.
    """
    Q = MatrixValidator.as_matrix(Q, "Q")
    off_diagonal = np.abs(Q - np.diag(np.diag(Q)))
    if np.any(off_diagonal >= OFF_DIAGONAL_TOL):
        i, j = (int(v) for v in np.argwhere(off_diagonal >= OFF_DIAGONAL_TOL)[0])
        return MonotonicityVerdict(
            monotone=False,
            reason=f"Q não é diagonal: q[{i},{j}] = {Q[i, j]:.3g}",
            condition=1,
            entry=(i, j),
        )

    d = float(np.max(np.linalg.eigvalsh(Q)))
    for n, P in enumerate(P_alphas):
        P = MatrixValidator.as_matrix(P, f"P_alphas[{n}]")
        MatrixValidator.require_shape(P, Q.shape, f"P_alphas[{n}]")
        c = float(np.min(np.linalg.eigvalsh(P)))
        margin = (c / d) * P - Q
        if relaxed:
            failing = np.where(np.eye(margin.shape[0], dtype=bool), margin >= 0.0, margin > 0.0)
        else:
            failing = margin >= 0.0
        if np.any(failing):
            i, j = (int(v) for v in np.argwhere(failing)[0])
            return MonotonicityVerdict(
                monotone=False,
                reason=f"(c/d)P - Q não negativa em ({i},{j}) para a sonda {n}: {margin[i, j]:.3g}",
                condition=2,
                probe_index=n,
                entry=(i, j),
            )
    return MonotonicityVerdict(monotone=True)


def beam_probe(models: Sequence[LinearGaussianModel]) -> np.ndarray:
    """αᵢ = Tr(Σ⁻¹_pred(i)) no ponto fixo de Riccati de cada alvo"""
    if not models:
        raise ConfigurationError("beam_probe exige ao menos um alvo", {"models": ["lista vazia"]})
    alpha = []
    for i, model in enumerate(models):
        predicted = predicted_covariance_fixed_point(model)
        alpha.append(float(np.trace(MatrixValidator.checked_inverse(predicted, f"predicted_cov[{i}]"))))
    return np.array(alpha)
