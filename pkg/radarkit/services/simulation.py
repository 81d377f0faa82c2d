import logging

import numpy as np

from radarkit.models.statespace import ActionMap, EngagementTrace, GaussianBelief, LinearGaussianModel
from radarkit.services.tracker import kalman_step
from radarkit.utils import rng
from radarkit.utils.errors import ValidationError

logger = logging.getLogger(__name__)


def gaussian_draws(generator: np.random.Generator, cov: np.ndarray, size: int) -> np.ndarray:
    """Amostras N(0, cov) de forma (size, dim); aceita cov semi-definida"""
    dim = cov.shape[0]
    z = generator.standard_normal((size, dim))
    if not np.any(cov):
        return np.zeros((size, dim))
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(cov)
        factor = vecs * np.sqrt(np.clip(vals, 0.0, None))
    return z @ factor.T


def simulate_engagement(model: LinearGaussianModel, action_map: ActionMap, horizon: int, seed: int) -> EngagementTrace:
    """Simula x_{0:N}, y_{1:N}, as crenças do adversário e as ações medidas"""
    if int(horizon) < 1:
        raise ValidationError("horizon deve ser >= 1", {"horizon": [f"recebido {horizon}"]})
    horizon = int(horizon)
    x_dim, y_dim = model.x_dim, model.y_dim

    x0 = model.prior_mean + gaussian_draws(rng.stream(seed, rng.STREAM_INITIAL_STATE), model.prior_cov, 1)[0]
    w = gaussian_draws(rng.stream(seed, rng.STREAM_PROCESS_NOISE), model.Q, horizon)
    v = gaussian_draws(rng.stream(seed, rng.STREAM_OBSERVATION_NOISE), model.R, horizon)
    eps = np.sqrt(action_map.action_noise_var) * rng.stream(seed, rng.STREAM_ACTION_NOISE).standard_normal((horizon, x_dim))

    states = np.empty((horizon, x_dim))
    observations = np.empty((horizon, y_dim))
    means = np.empty((horizon, x_dim))
    covs = np.empty((horizon, x_dim, x_dim))
    actions = np.empty((horizon, x_dim))

    belief = GaussianBelief.from_prior(model)
    x = x0
    for k in range(horizon):
        x = model.A @ x + w[k]
        y = model.C @ x + v[k]
        belief = kalman_step(model, belief, y).posterior
        states[k] = x
        observations[k] = y
        means[k] = belief.mean
        covs[k] = belief.cov
        actions[k] = action_map.phi(belief.cov) @ belief.mean + eps[k]

    logger.debug(f"Simulated engagement: horizon={horizon}, seed={seed}")
    return EngagementTrace(
        initial_state=x0,
        states=states,
        observations=observations,
        adversary_means=means,
        adversary_covs=covs,
        actions=actions,
        seed=seed,
    )
