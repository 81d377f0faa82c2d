"""Estimação e calibração do ganho do sensor adversário C.

Verossimilhanças clássica (observações do adversário) e inversa (nossas medidas
das ações), MLE em grade com refinamento por seção áurea, sensibilidades por
diferenças finitas e limite de Cramér-Rao por informação de Fisher Monte Carlo.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from radarkit.models.identification import EstimationMode, LikelihoodCurve, SensitivityReport
from radarkit.models.statespace import ActionMap, EngagementTrace, GaussianBelief, LinearGaussianModel, PhiKind
from radarkit.services.ensemble_runner import ensemble_runner
from radarkit.services.inverse_tracker import inverse_kalman_filter
from radarkit.services.simulation import simulate_engagement
from radarkit.services.tracker import gain_sequence, kalman_step
from radarkit.utils import rng
from radarkit.utils.errors import ConfigurationError, NumericalError, ValidationError
from radarkit.utils.stats import stable_mean

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)
MIN_CRB_ENSEMBLE = 100


def _gaussian_loglik(innovations: Sequence[np.ndarray], innovation_covs: Sequence[np.ndarray]) -> float:
    terms = []
    for e, S in zip(innovations, innovation_covs):
        sign, logdet = np.linalg.slogdet(S)
        if sign <= 0:
            raise NumericalError("Covariância de inovação singular", {"logdet_sign": float(sign)})
        terms.append(-0.5 * (e.size * LOG_2PI + logdet + float(e @ np.linalg.solve(S, e))))
    return math.fsum(terms)


def _require_nonempty(trace: EngagementTrace) -> None:
    if trace.horizon == 0:
        raise ValidationError("Trajetória vazia", {"trace": ["N = 0"]})


def classic_innovations(model: LinearGaussianModel, trace: EngagementTrace) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    _require_nonempty(trace)
    belief = GaussianBelief.from_prior(model)
    innovations, covs = [], []
    for y in trace.observations:
        step = kalman_step(model, belief, y)
        innovations.append(step.innovation)
        covs.append(step.innovation_cov)
        belief = step.posterior
    return innovations, covs


def loglik_classic(model: LinearGaussianModel, trace: EngagementTrace) -> float:
    """ℓ(θ) clássico a partir de y_{1:N} (ganho θ = model.C)"""
    innovations, covs = classic_innovations(model, trace)
    value = _gaussian_loglik(innovations, covs)
    if not math.isfinite(value):
        raise NumericalError("Verossimilhança não finita", {"theta": model.C.tolist()})
    return value


def loglik_inverse(model: LinearGaussianModel, action_map: ActionMap, trace: EngagementTrace,
                   paper_literal_qbar: bool = False) -> float:
    """ℓ(θ) inverso a partir de (x_{1:N}, a_{1:N}); as observações do adversário não entram"""
    _require_nonempty(trace)
    _, innovations, covs = inverse_kalman_filter(model, action_map, trace, paper_literal_qbar=paper_literal_qbar)
    value = _gaussian_loglik(innovations, covs)
    if not math.isfinite(value):
        raise NumericalError("Verossimilhança não finita", {"theta": model.C.tolist()})
    return value


def _is_scalar(model: LinearGaussianModel) -> bool:
    return model.x_dim == 1 and model.y_dim == 1


def loglik_grid(model: LinearGaussianModel, action_map: ActionMap, trace: EngagementTrace,
                thetas: Sequence[float], mode: EstimationMode,
                paper_literal_qbar: bool = False) -> np.ndarray:
    """ℓ(θ) para todos os θ de uma vez

    Modelos escalares usam uma única recursão vetorizada sobre a grade; os
    demais caem no caminho matricial geral, um θ por vez.
    """
    _require_nonempty(trace)
    thetas = np.asarray(thetas, dtype=float).reshape(-1)
    mode = EstimationMode(mode)
    if not _is_scalar(model):
        if model.C.size != 1:
            raise ConfigurationError("Grade de θ só para ganho escalar", {"C": [f"forma {model.C.shape}"]})
        if mode is EstimationMode.CLASSIC:
            return np.array([loglik_classic(model.with_gain(t), trace) for t in thetas])
        return np.array([loglik_inverse(model.with_gain(t), action_map, trace, paper_literal_qbar) for t in thetas])

    a = float(model.A[0, 0])
    q = float(model.Q[0, 0])
    r = float(model.R[0, 0])
    c = thetas
    terms = []

    if mode is EstimationMode.CLASSIC:
        m = np.full_like(c, float(model.prior_mean[0]))
        P = np.full_like(c, float(model.prior_cov[0, 0]))
        for y in trace.observations[:, 0]:
            Pp = a * a * P + q
            S = c * c * Pp + r
            e = y - c * a * m
            K = Pp * c / S
            m = a * m + K * e
            P = Pp - K * c * Pp
            terms.append(-0.5 * (LOG_2PI + np.log(S) + e * e / S))
    else:
        noise_var = action_map.action_noise_var
        noise_scale = 1.0 if paper_literal_qbar else r
        Sigma = np.full_like(c, float(model.prior_cov[0, 0]))
        mm = np.full_like(c, float(model.prior_mean[0]))
        PP = np.zeros_like(c)
        for x_next, action in zip(trace.states[:, 0], trace.actions[:, 0]):
            Pp_adv = a * a * Sigma + q
            psi = Pp_adv * c / (c * c * Pp_adv + r)
            Sigma = Pp_adv - psi * c * Pp_adv
            phi = 1.0 if action_map.phi_kind is PhiKind.IDENTITY else 1.0 / (1.0 + Sigma)
            A_bar = (1.0 - psi * c) * a
            F_bar = psi * c
            pred = A_bar * mm + F_bar * x_next
            PPp = A_bar * A_bar * PP + psi * psi * noise_scale
            S_bar = phi * phi * PPp + noise_var
            iota = action - phi * pred
            K = PPp * phi / S_bar
            mm = pred + K * iota
            PP = PPp - K * phi * PPp
            with np.errstate(divide="ignore", invalid="ignore"):
                terms.append(-0.5 * (LOG_2PI + np.log(S_bar) + iota * iota / S_bar))

    loglik = np.sum(np.vstack(terms), axis=0)
    bad = ~np.isfinite(loglik)
    if np.any(bad):
        raise NumericalError(
            "Verossimilhança não finita",
            {"theta": float(thetas[np.argmax(bad)]), "mode": mode.value}
        )
    return loglik


def _innovations_at(model: LinearGaussianModel, action_map: ActionMap, trace: EngagementTrace,
                    theta: float, mode: EstimationMode, paper_literal_qbar: bool) -> np.ndarray:
    candidate = model.with_gain(theta)
    if mode is EstimationMode.CLASSIC:
        innovations, _ = classic_innovations(candidate, trace)
    else:
        _, innovations, _ = inverse_kalman_filter(candidate, action_map, trace, paper_literal_qbar=paper_literal_qbar)
    return np.vstack(innovations)


def mle_gain(trace: EngagementTrace, model: LinearGaussianModel, action_map: ActionMap,
             mode: EstimationMode, grid: Tuple[float, float, int] = (0.01, 10.0, 1000),
             refine_tol: float = 1e-6, paper_literal_qbar: bool = False) -> Tuple[float, LikelihoodCurve]:
    """MLE escalar de C: varredura em grade e refinamento por seção áurea

    Com σ²_ε = 0 o θ̂ inverso não recupera θ° exatamente: o termo log|S̄ᶿ|
    ainda depende de θ. Nesse limite o que é exato é a reconstrução de y_{1:N}
    por recover_adversary_observations.
    """
    lo, hi, count = float(grid[0]), float(grid[1]), int(grid[2])
    if not lo > 0.0 or not hi > lo or count < 2:
        raise ValidationError(
            "Grade inválida para o ganho",
            {"grid": [f"exige 0 < lo < hi e count >= 2, recebido {grid}"]}
        )
    if model.C.size != 1:
        raise ConfigurationError("MLE implementado só para ganho escalar", {"C": [f"forma {model.C.shape}"]})
    mode = EstimationMode(mode)

    thetas = np.linspace(lo, hi, count)
    loglik = loglik_grid(model, action_map, trace, thetas, mode, paper_literal_qbar)
    best = int(np.argmax(loglik))
    theta_star = float(thetas[best])
    boundary_hit = best in (0, count - 1)

    if boundary_hit:
        logger.warning(f"MLE ({mode.value}) hit the grid boundary at theta={theta_star:.6g}")
    elif loglik[best] > max(loglik[best - 1], loglik[best + 1]):
        def objective(theta: float) -> float:
            return -float(loglik_grid(model, action_map, trace, [theta], mode, paper_literal_qbar)[0])

        result = minimize_scalar(
            objective,
            bracket=(thetas[best - 1], thetas[best], thetas[best + 1]),
            method="golden",
            options={"xtol": refine_tol},
        )
        if thetas[best - 1] <= result.x <= thetas[best + 1] and -result.fun >= loglik[best]:
            theta_star = float(result.x)

    curve = LikelihoodCurve(
        thetas=thetas,
        loglik=loglik,
        mode=mode,
        innovations_last=_innovations_at(model, action_map, trace, theta_star, mode, paper_literal_qbar),
        boundary_hit=boundary_hit,
    )
    return theta_star, curve


def recover_adversary_observations(model: LinearGaussianModel, action_map: ActionMap,
                                   trace: EngagementTrace) -> np.ndarray:
    """Reconstrói y_{1:N} das ações quando σ²_ε = 0

    Com ações sem ruído x̂_k = φ(Σ_k)⁻¹ a_k e, se ψ tem posto coluna completo,
    y_{k+1} = C A x̂_k + ψ⁺ (x̂_{k+1} - A x̂_k).
    """
    _require_nonempty(trace)
    gains, covs, _ = gain_sequence(model, trace.horizon)
    previous = model.prior_mean
    recovered = []
    for k in range(trace.horizon):
        current = np.linalg.solve(action_map.phi(covs[k]), trace.actions[k])
        increment = current - model.A @ previous
        recovered.append(model.C @ model.A @ previous + np.linalg.pinv(gains[k]) @ increment)
        previous = current
    return np.vstack(recovered)


def _second_difference(values: np.ndarray, h: float) -> float:
    return float((values[2] - 2.0 * values[1] + values[0]) / (h * h))


def mean_curvature(model: LinearGaussianModel, action_map: ActionMap, traces: Sequence[EngagementTrace],
                   theta: float, h_theta: float, mode: EstimationMode) -> float:
    """∂²ℓ/∂θ² em θ por diferença central, ℓ médio sobre o ensemble"""
    mode = EstimationMode(mode)
    thetas = [theta - h_theta, theta, theta + h_theta]

    def member(trace: EngagementTrace) -> np.ndarray:
        return loglik_grid(model, action_map, trace, thetas, mode)

    values = ensemble_runner.map(member, traces, label=f"{mode.value} curvature")
    averaged = np.array([stable_mean(v[i] for v in values) for i in range(3)])
    return _second_difference(averaged, h_theta)


def _noise_shift(model: LinearGaussianModel, which: str, delta: float) -> LinearGaussianModel:
    if which == "Q":
        return model.with_noise(Q=model.Q + delta * np.eye(model.x_dim))
    return model.with_noise(R=model.R + delta * np.eye(model.y_dim))


def _etas(model, action_map, traces, theta, mode, h_theta, h_Q, h_R) -> Tuple[float, float]:
    etas = []
    for which, h in (("Q", h_Q), ("R", h_R)):
        up = mean_curvature(_noise_shift(model, which, h), action_map, traces, theta, h_theta, mode)
        down = mean_curvature(_noise_shift(model, which, -h), action_map, traces, theta, h_theta, mode)
        etas.append((up - down) / (2.0 * h))
    return etas[0], etas[1]


def sensitivity(model: LinearGaussianModel, action_map: ActionMap, traces: Sequence[EngagementTrace],
                mode: EstimationMode, steps: Optional[Tuple[float, float, float]] = None,
                rel_tol: float = 0.10) -> SensitivityReport:
    """η_Q = ∂/∂Q (∂²ℓ/∂θ²) e η_R no ganho verdadeiro, ℓ médio sobre o ensemble

    Q e R são perturbadas na direção da identidade. A estabilidade é checada
    repetindo o cálculo com todos os passos pela metade.
    """
    traces = list(traces)
    if not traces:
        raise ValidationError("Ensemble vazio", {"traces": ["ao menos uma trajetória"]})
    if model.C.size != 1:
        raise ConfigurationError("Sensibilidade só para ganho escalar", {"C": [f"forma {model.C.shape}"]})
    mode = EstimationMode(mode)
    theta = float(model.C.reshape(-1)[0])
    if steps is None:
        steps = (
            1e-3 * max(1.0, abs(theta)),
            1e-3 * max(1.0, float(np.max(np.abs(model.Q)))),
            1e-3 * max(1.0, float(np.max(np.abs(model.R)))),
        )
    h_theta, h_Q, h_R = (float(s) for s in steps)

    eta_Q, eta_R = _etas(model, action_map, traces, theta, mode, h_theta, h_Q, h_R)
    eta_Q_half, eta_R_half = _etas(model, action_map, traces, theta, mode, h_theta / 2, h_Q / 2, h_R / 2)

    notes = []
    for name, full, half in (("eta_Q", eta_Q, eta_Q_half), ("eta_R", eta_R, eta_R_half)):
        if not abs(full - half) < rel_tol * max(abs(half), 1e-300):
            notes.append(f"{name} mudou {abs(full - half):.3g} ao dividir os passos por 2")
    if notes:
        logger.warning(f"Sensitivity ({mode.value}) not converged: {'; '.join(notes)}")

    return SensitivityReport(
        eta_Q=eta_Q,
        eta_R=eta_R,
        step_sizes=(h_theta, h_Q, h_R),
        mode=mode,
        converged=not notes,
        eta_Q_halved=eta_Q_half,
        eta_R_halved=eta_R_half,
        notes=notes,
    )


def simulate_ensemble(model: LinearGaussianModel, action_map: ActionMap, horizon: int,
                      ensemble_size: int, seed: int) -> List[EngagementTrace]:
    """Trajetórias independentes com sementes derivadas de (seed, índice)"""
    seeds = [rng.derive_seed(seed, rng.STREAM_ENSEMBLE, i) for i in range(int(ensemble_size))]
    return ensemble_runner.map(
        lambda member_seed: simulate_engagement(model, action_map, horizon, member_seed),
        seeds,
        label="trace ensemble",
    )


def crb_gain(model: LinearGaussianModel, action_map: ActionMap, mode: EstimationMode,
             ensemble_size: int, seed: int, horizon: int = 500,
             h_theta: Optional[float] = None) -> float:
    """CRB = 1 / Ê[-∂²ℓ/∂θ²] no ganho verdadeiro, por Monte Carlo"""
    if int(ensemble_size) < MIN_CRB_ENSEMBLE:
        raise ValidationError(
            f"ensemble_size deve ser >= {MIN_CRB_ENSEMBLE}",
            {"ensemble_size": [f"recebido {ensemble_size}"]}
        )
    if model.C.size != 1:
        raise ConfigurationError("CRB só para ganho escalar", {"C": [f"forma {model.C.shape}"]})
    mode = EstimationMode(mode)
    theta = float(model.C.reshape(-1)[0])
    h = float(h_theta) if h_theta else 1e-3 * max(1.0, abs(theta))

    traces = simulate_ensemble(model, action_map, horizon, ensemble_size, seed)
    curvatures = ensemble_runner.map(
        lambda trace: _second_difference(loglik_grid(model, action_map, trace, [theta - h, theta, theta + h], mode), h),
        traces,
        label=f"{mode.value} fisher",
    )
    fisher = -stable_mean(curvatures)
    if not fisher > 0.0:
        raise NumericalError(
            "Estimativa de informação de Fisher não positiva",
            {"fisher": fisher, "ensemble_size": int(ensemble_size), "h_theta": h}
        )
    logger.info(f"CRB ({mode.value}) at C={theta:g}: {1.0 / fisher:.6g} over {ensemble_size} traces")
    return 1.0 / fisher
