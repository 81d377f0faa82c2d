"""Nosso estimador da crença do adversário: filtro de Kalman inverso e a
aproximação por partículas do filtro inverso ótimo."""
import logging
from typing import List, Tuple

import numpy as np

from radarkit import settings
from radarkit.models.statespace import ActionMap, EngagementTrace, GaussianBelief, LinearGaussianModel
from radarkit.models.tracking import FilterForm, InverseModelParams, ParticleCloud
from radarkit.services.ensemble_runner import ensemble_runner
from radarkit.services.simulation import gaussian_draws
from radarkit.services.tracker import covariance_update, gain_sequence, information_update
from radarkit.utils import rng
from radarkit.utils.errors import DegeneracyError, ValidationError
from radarkit.utils.validators import MatrixValidator, symmetrize

logger = logging.getLogger(__name__)

RESAMPLE_THRESHOLD = 0.5


def derive_inverse_params(model: LinearGaussianModel, action_map: ActionMap, horizon: int,
                          paper_literal_qbar: bool = False) -> List[InverseModelParams]:
    """Parâmetros (Ā_k, F̄_k, C̄_{k+1}, Q̄_k, R̄) para k = 0..horizon-1"""
    if int(horizon) < 0:
        raise ValidationError("horizon deve ser >= 0", {"horizon": [f"recebido {horizon}"]})
    gains, covs, _ = gain_sequence(model, int(horizon))
    eye = np.eye(model.x_dim)
    R_bar = action_map.action_noise_var * eye
    params = []
    for gain, cov in zip(gains, covs):
        F_bar = gain @ model.C
        noise_cov = np.eye(model.y_dim) if paper_literal_qbar else model.R
        params.append(InverseModelParams(
            A_bar=(eye - F_bar) @ model.A,
            F_bar=F_bar,
            C_bar=action_map.phi(cov),
            Q_bar=symmetrize(gain @ noise_cov @ gain.T),
            R_bar=R_bar,
            gain=gain,
            adversary_cov=cov,
        ))
    return params


def _inverse_update(params: InverseModelParams, belief: GaussianBelief, action, our_state_next,
                    form: FilterForm) -> Tuple[GaussianBelief, np.ndarray, np.ndarray]:
    a = MatrixValidator.as_vector(action, "action")
    x_next = MatrixValidator.as_vector(our_state_next, "our_state_next")

    predicted_mean = params.A_bar @ belief.mean + params.F_bar @ x_next
    predicted_cov = symmetrize(params.A_bar @ belief.cov @ params.A_bar.T + params.Q_bar)
    innovation = a - params.C_bar @ predicted_mean

    if not np.any(params.R_bar):
        # σ²_ε = 0: a ação revela x̂ exatamente, x̂̂ = φ⁻¹ a e Σ̄ = 0
        S_bar = symmetrize(params.C_bar @ predicted_cov @ params.C_bar.T)
        mean = np.linalg.solve(params.C_bar, a)
        return GaussianBelief(mean, np.zeros_like(predicted_cov)), innovation, S_bar

    update = information_update if FilterForm(form) is FilterForm.INFORMATION else covariance_update
    S_bar, gain, posterior_cov = update(predicted_cov, params.C_bar, params.R_bar)
    posterior = GaussianBelief(predicted_mean + gain @ innovation, posterior_cov)
    return posterior, innovation, S_bar


def inverse_kalman_step(params: InverseModelParams, belief: GaussianBelief, action, our_state_next,
                        form: FilterForm = FilterForm.COVARIANCE) -> GaussianBelief:
    """Um passo do filtro de Kalman inverso: (x̂̂_k, Σ̄_k) -> (x̂̂_{k+1}, Σ̄_{k+1})"""
    posterior, _, _ = _inverse_update(params, belief, action, our_state_next, form)
    return posterior


def _check_trace(model: LinearGaussianModel, trace: EngagementTrace) -> None:
    n = trace.horizon
    expected = {"states": (n, model.x_dim), "actions": (n, model.x_dim)}
    for name, shape in expected.items():
        arr = getattr(trace, name)
        if n and arr.shape != shape:
            raise ValidationError(
                "Trajetória incompatível com o modelo",
                {name: [f"esperado {shape}, recebido {arr.shape}"]}
            )


def inverse_kalman_filter(model: LinearGaussianModel, action_map: ActionMap, trace: EngagementTrace,
                          form: FilterForm = FilterForm.COVARIANCE, paper_literal_qbar: bool = False
                          ) -> Tuple[List[GaussianBelief], List[np.ndarray], List[np.ndarray]]:
    """Crenças, inovações ι_k e covariâncias S̄_k ao longo da trajetória"""
    _check_trace(model, trace)
    params = derive_inverse_params(model, action_map, trace.horizon, paper_literal_qbar)
    # compartilhamos o prior do adversário: x̂̂_0 = x̂_0 e Σ̄_0 = 0
    belief = GaussianBelief(model.prior_mean, np.zeros((model.x_dim, model.x_dim)))
    beliefs, innovations, innovation_covs = [], [], []
    for k, step_params in enumerate(params):
        belief, innovation, S_bar = _inverse_update(step_params, belief, trace.actions[k], trace.states[k], form)
        beliefs.append(belief)
        innovations.append(innovation)
        innovation_covs.append(S_bar)
    return beliefs, innovations, innovation_covs


def inverse_kalman_run(model: LinearGaussianModel, action_map: ActionMap, trace: EngagementTrace,
                       form: FilterForm = FilterForm.COVARIANCE, paper_literal_qbar: bool = False
                       ) -> List[GaussianBelief]:
    beliefs, _, _ = inverse_kalman_filter(model, action_map, trace, form, paper_literal_qbar)
    return beliefs


def _systematic_resample(weights: np.ndarray, offset: float) -> np.ndarray:
    count = weights.size
    positions = (offset + np.arange(count)) / count
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    return np.searchsorted(cumulative, positions, side="right").clip(0, count - 1)


def inverse_particle_filter(model: LinearGaussianModel, action_map: ActionMap, trace: EngagementTrace,
                            particle_count: int, seed: int) -> List[ParticleCloud]:
    """Filtro de partículas sobre x̂_k com a densidade de importância ótima

    Cada partícula amostra y_{k+1} ~ N(C x_{k+1}, R), passa pela atualização de
    Kalman do adversário e recebe o log-peso N(a_{k+1}; φ(Σ_{k+1}) x̂_{k+1}, σ²_ε I).
    """
    particle_count = int(particle_count)
    if particle_count < 2:
        raise ValidationError(
            "particle_count deve ser >= 2",
            {"particle_count": [f"recebido {particle_count}"]}
        )
    _check_trace(model, trace)
    gains, covs, _ = gain_sequence(model, trace.horizon)
    noise_var = action_map.action_noise_var
    CA = model.C @ model.A
    chunks = rng.chunk_bounds(particle_count, settings.MC_CHUNK)

    particles = np.tile(model.prior_mean, (particle_count, 1))
    log_weights = np.zeros(particle_count)
    clouds = []
    for k in range(trace.horizon):
        gain, x_next, action = gains[k], trace.states[k], trace.actions[k]
        phi = action_map.phi(covs[k])

        def propagate(chunk_index: int) -> np.ndarray:
            start, stop = chunks[chunk_index]
            generator = rng.stream(seed, rng.STREAM_PARTICLE_OBS, chunk_index, k)
            y = model.C @ x_next + gaussian_draws(generator, model.R, stop - start)
            block = particles[start:stop]
            return block @ model.A.T + (y - block @ CA.T) @ gain.T

        particles = np.vstack(ensemble_runner.map(propagate, range(len(chunks)), label="particle chunks"))

        residual = action - particles @ phi.T
        if noise_var > 0.0:
            log_weights = log_weights - 0.5 * np.sum(residual ** 2, axis=1) / noise_var
        else:
            log_weights = np.where(np.all(residual == 0.0, axis=1), log_weights, -np.inf)

        top = np.max(log_weights)
        if not np.isfinite(top):
            raise DegeneracyError(
                "Todos os pesos das partículas são zero",
                {"step": k + 1, "action_noise_var": noise_var,
                 "hint": "aumente action_noise_var ou o número de partículas"}
            )
        weights = np.exp(log_weights - top)
        weights /= weights.sum()
        ess = float(1.0 / np.sum(weights ** 2))

        resample = ess < RESAMPLE_THRESHOLD * particle_count
        clouds.append(ParticleCloud(particles=particles.copy(), weights=weights, ess=ess, resampled=resample))
        if resample:
            offset = rng.stream(seed, rng.STREAM_PARTICLE_RESAMPLE, k).uniform()
            particles = particles[_systematic_resample(weights, offset)]
            log_weights = np.zeros(particle_count)
        else:
            with np.errstate(divide="ignore"):
                log_weights = np.log(weights)

    logger.debug(f"Inverse particle filter finished: {trace.horizon} steps, {particle_count} particles")
    return clouds
