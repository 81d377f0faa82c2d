"""Otimizador de forma de onda do radar (máxima SCNR) e o projeto de
interferência inteligente com restrição de chance."""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from radarkit import settings
from radarkit.models.interference import (
    ChanceEstimate,
    ChanceSpec,
    DesignStatus,
    InterferenceDesign,
    MimoChannel,
    ProbeLag,
    ProbePlan,
    PulseRecord,
    WaveformSolution,
)
from radarkit.services.ensemble_runner import ensemble_runner
from radarkit.utils import rng
from radarkit.utils.errors import ConfigurationError, ValidationError
from radarkit.utils.stats import wilson_interval

logger = logging.getLogger(__name__)

POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000
BISECTION_REL_TOL = 1e-3
RESIDUAL_TOL = 1e-8


def _noise_term(H_t: np.ndarray, radar_noise_var: float) -> float:
    return H_t.shape[0] * float(radar_noise_var)


def scnr(H_t, H_c, W, radar_noise_var: float) -> float:
    """‖H_t W‖² / (‖H_c W‖² + JK·σ̃²_r)"""
    H_t = np.atleast_2d(np.asarray(H_t))
    H_c = np.atleast_2d(np.asarray(H_c))
    W = np.asarray(W).reshape(-1)
    return float(scnr_batch(H_t, H_c, W[None, :], radar_noise_var)[0])


def scnr_batch(H_t: np.ndarray, H_c: np.ndarray, W: np.ndarray, radar_noise_var: float) -> np.ndarray:
    """SCNR para cada linha de W"""
    signal = np.sum(np.abs(W @ H_t.T) ** 2, axis=1)
    clutter = np.sum(np.abs(W @ H_c.T) ** 2, axis=1)
    return signal / (clutter + _noise_term(H_t, radar_noise_var))


def _fix_phase(w: np.ndarray) -> np.ndarray:
    """Componente de maior módulo real e positiva"""
    pivot = w[int(np.argmax(np.abs(w)))]
    if pivot == 0:
        return w
    return w * (np.conj(pivot) / np.abs(pivot))


def optimal_waveform(H_t, H_c, radar_noise_var: float,
                     tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> WaveformSolution:
    """W* dominante de H_tᴴH_t w = λ (H_cᴴH_c + JK·σ̃²_r I) w

    Clareamento por Cholesky do lado direito e iteração de potência no
    problema hermitiano resultante, parando quando o quociente de Rayleigh
    varia menos que tol (relativo). Sem convergência, o autovetor dominante
    é tomado de uma decomposição completa e a solução é marcada degenerada.
    """
    H_t = np.atleast_2d(np.asarray(H_t))
    H_c = np.atleast_2d(np.asarray(H_c))
    if H_t.shape != H_c.shape:
        raise ConfigurationError("H_t e H_c com formas diferentes", {"H_c": [f"{H_c.shape} vs {H_t.shape}"]})
    if not float(radar_noise_var) > 0.0:
        raise ValidationError("radar_noise_var deve ser > 0", {"radar_noise_var": [f"recebido {radar_noise_var}"]})

    n = H_t.shape[1]
    signal = H_t.conj().T @ H_t
    clutter = H_c.conj().T @ H_c + _noise_term(H_t, radar_noise_var) * np.eye(n)
    L = np.linalg.cholesky(clutter)
    L_inv = np.linalg.inv(L)
    M = L_inv @ signal @ L_inv.conj().T
    M = 0.5 * (M + M.conj().T)

    column_norms = np.linalg.norm(M, axis=0)
    degenerate = False
    iterations = 0
    if not np.any(column_norms):
        v = np.zeros(n, dtype=M.dtype)
        v[0] = 1.0
        degenerate = True
    else:
        v = M[:, int(np.argmax(column_norms))]
        v = v / np.linalg.norm(v)
        value = float(np.real(v.conj() @ M @ v))
        converged = False
        for iterations in range(1, max_iter + 1):
            v = M @ v
            v = v / np.linalg.norm(v)
            image = M @ v
            new_value = float(np.real(v.conj() @ image))
            residual = float(np.linalg.norm(image - new_value * v))
            if abs(new_value - value) < tol * abs(new_value) and residual <= RESIDUAL_TOL * abs(new_value):
                converged = True
                value = new_value
                break
            value = new_value
        if not converged:
            logger.warning(f"Power iteration stagnated after {max_iter} iterations; using dense eigensolver")
            _, vecs = np.linalg.eigh(M)
            v = vecs[:, -1]
            degenerate = True

    eigenvalue = float(np.real(v.conj() @ M @ v))
    w = L_inv.conj().T @ v
    w = w / np.linalg.norm(w)
    w = _fix_phase(w)
    return WaveformSolution(
        waveform=w,
        eigenvalue=eigenvalue,
        scnr_max=scnr(H_t, H_c, w, radar_noise_var),
        degenerate=degenerate,
        iterations=iterations,
    )


def _our_noise(channel: MimoChannel, generator: np.random.Generator, size: int, complex_valued: bool) -> np.ndarray:
    """E_o de média zero e covariância σ̃²_o I (gaussiana circular no caso complexo)"""
    dim = channel.waveform_dim
    if complex_valued:
        scale = np.sqrt(channel.our_noise_var / 2.0)
        return scale * (generator.standard_normal((size, dim)) + 1j * generator.standard_normal((size, dim)))
    return np.sqrt(channel.our_noise_var) * generator.standard_normal((size, dim))


def _is_complex(channel: MimoChannel, plan: ProbePlan) -> bool:
    return channel.is_complex or np.iscomplexobj(plan.probes)


def simulate_pulses(channel: MimoChannel, plan: ProbePlan, seed: int) -> List[PulseRecord]:
    """Dinâmica pulso a pulso: H_c(l), W*(l) e a medida Y(l) = W*(l) + E_o(l)"""
    records = []
    complex_valued = _is_complex(channel, plan)
    for pulse in range(1, plan.length + 1):
        clutter = plan.clutter_at(channel, pulse)
        solution = optimal_waveform(channel.H_t, clutter, channel.radar_noise_var)
        noise = _our_noise(channel, rng.stream(seed, rng.STREAM_OUR_NOISE, pulse), 1, complex_valued)[0]
        records.append(PulseRecord(pulse=pulse, clutter=clutter, solution=solution,
                                   observation=solution.waveform + noise))
    return records


def scnr_samples(channel: MimoChannel, plan: ProbePlan, pulse: int, samples: int, seed: int,
                 normalize: bool = False) -> Tuple[np.ndarray, WaveformSolution]:
    """SCNR(H_t, H_c(l), Y(l)) em `samples` realizações de E_o

    O ruído é chaveado por (seed, pulso, bloco) e não depende do plano, então
    varreduras em r e Δ compartilham as mesmas amostras.
    """
    clutter = plan.clutter_at(channel, pulse)
    solution = optimal_waveform(channel.H_t, clutter, channel.radar_noise_var)
    complex_valued = _is_complex(channel, plan)
    chunks = rng.chunk_bounds(int(samples), settings.MC_CHUNK)

    def evaluate(chunk_index: int) -> np.ndarray:
        start, stop = chunks[chunk_index]
        generator = rng.stream(seed, rng.STREAM_CHANCE, pulse, chunk_index)
        Y = solution.waveform + _our_noise(channel, generator, stop - start, complex_valued)
        if normalize:
            Y = Y / np.linalg.norm(Y, axis=1, keepdims=True)
        return scnr_batch(channel.H_t, clutter, Y, channel.radar_noise_var)

    values = ensemble_runner.map(evaluate, range(len(chunks)), label=f"chance pulse {pulse}")
    return np.concatenate(values), solution


def estimate_from_samples(values: np.ndarray, delta: float) -> ChanceEstimate:
    successes = int(np.count_nonzero(values <= delta))
    lower, upper = wilson_interval(successes, values.size)
    return ChanceEstimate(
        p_hat=successes / values.size,
        ci_halfwidth=0.5 * (upper - lower),
        lower=lower,
        upper=upper,
        samples=int(values.size),
    )


def chance_probability(channel: MimoChannel, plan: ProbePlan, spec: ChanceSpec, pulse: int) -> ChanceEstimate:
    """P(SCNR(H_t, H_c(l), Y(l)) ≤ Δ) por Monte Carlo com intervalo de Wilson 95%"""
    values, _ = scnr_samples(channel, plan, pulse, spec.mc_samples, spec.seed, spec.normalize)
    return estimate_from_samples(values, spec.delta)


def _feasible(channel: MimoChannel, shapes: np.ndarray, lag: ProbeLag, spec: ChanceSpec,
              r: float) -> Tuple[bool, List[dict]]:
    plan = ProbePlan.scaled(shapes, r, lag)
    rows = []
    ok = True
    for pulse in plan.constrained_pulses():
        values, solution = scnr_samples(channel, plan, pulse, spec.mc_samples, spec.seed, spec.normalize)
        estimate = estimate_from_samples(values, spec.delta)
        ok = ok and estimate.lower >= 1.0 - spec.epsilon
        rows.append({
            "r": r,
            "pulse": pulse,
            "p_hat": estimate.p_hat,
            "ci": estimate.ci_halfwidth,
            "lower": estimate.lower,
            "scnr_max": solution.scnr_max,
        })
    return ok, rows


def design_interference(channel: MimoChannel, probe_shapes: Sequence, spec: ChanceSpec,
                        r_grid: Tuple[float, float, int], lag: ProbeLag = ProbeLag.ONE_STEP,
                        rel_tol: float = BISECTION_REL_TOL) -> InterferenceDesign:
    """Menor r da família H_p(l) = r·forma(l) que satisfaz a restrição de chance

    Viável significa limite inferior de Wilson ≥ 1 - ε em todo pulso afetado.
    Varre a grade e refina por bisseção entre as células que cercam a primeira
    viável. Nenhum ponto viável resulta em status INFEASIBLE.
    """
    shapes = np.asarray(probe_shapes)
    if shapes.ndim == 2:
        shapes = shapes[:, None, :]
    if not np.all(np.any(shapes.reshape(shapes.shape[0], -1) != 0, axis=1)):
        raise ValidationError("Formas de sonda devem ser não nulas", {"probe_shapes": ["forma nula"]})
    lo, hi, count = float(r_grid[0]), float(r_grid[1]), int(r_grid[2])
    if lo < 0.0 or hi < lo or count < 1:
        raise ValidationError("Grade de r inválida", {"r_grid": [f"recebido {r_grid}"]})
    lag = ProbeLag(lag)
    if not ProbePlan(shapes, lag).constrained_pulses():
        raise ConfigurationError(
            "Nenhum pulso é afetado pelo plano",
            {"probe_shapes": [f"L={shapes.shape[0]} com atraso {lag.value}"]}
        )

    grid = np.linspace(lo, hi, count)
    sweep: List[dict] = []
    first: Optional[int] = None
    for index, r in enumerate(grid):
        ok, rows = _feasible(channel, shapes, lag, spec, float(r))
        sweep.extend(rows)
        if ok:
            first = index
            break

    if first is None:
        logger.warning(f"No feasible interference level on grid for delta={spec.delta}, epsilon={spec.epsilon}")
        return InterferenceDesign(status=DesignStatus.INFEASIBLE, r_star=None, plan=None,
                                  objective=None, spec=spec, sweep=sweep)

    r_star = float(grid[first])
    if first > 0:
        below, above = float(grid[first - 1]), r_star
        while above - below > rel_tol * above:
            middle = 0.5 * (below + above)
            ok, _ = _feasible(channel, shapes, lag, spec, middle)
            if ok:
                above = middle
            else:
                below = middle
        r_star = above

    plan = ProbePlan.scaled(shapes, r_star, lag)
    logger.info(f"Interference design: r*={r_star:.6g} for delta={spec.delta}, epsilon={spec.epsilon}")
    return InterferenceDesign(status=DesignStatus.FEASIBLE, r_star=r_star, plan=plan,
                              objective=plan.power, spec=spec, sweep=sweep)
