"""Execução de experimentos configurados e emissão de artefatos.

Cada tipo de experimento grava seus CSV/JSON no diretório de trabalho e
devolve um RunOutcome com números de destaque e flags de padrão.
"""
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List

import numpy as np
import pandas as pd

from radarkit.models.config import (
    ChannelParams,
    CrbParams,
    ExperimentConfig,
    ExperimentKind,
    InterferenceParams,
    InverseKFParams,
    MleGainParams,
    ParticleVsKFParams,
    RpLinearParams,
    RpSinrParams,
    SensitivityParams,
    UtilityParams,
    WaveformParams,
    channel_array,
)
from radarkit.models.identification import EstimationMode
from radarkit.models.interference import ChanceSpec, DesignStatus, MimoChannel, ProbePlan
from radarkit.models.revealed import BudgetSpec, CobbDouglas, DiagonalLoadingBuilder, Leontief, RPDataset
from radarkit.services.ensemble_runner import ensemble_runner
from radarkit.services.identification import (
    crb_gain,
    mean_curvature,
    mle_gain,
    sensitivity,
    simulate_ensemble,
)
from radarkit.services.interference import (
    design_interference,
    estimate_from_samples,
    scnr_samples,
    simulate_pulses,
)
from radarkit.services.inverse_tracker import inverse_kalman_run, inverse_particle_filter
from radarkit.services.responders import beam_scenario, synth_responder
from radarkit.services.revealed import (
    afriat_feasibility,
    budget_gradient_oracle,
    garp_check,
    nonlinear_garp,
    thm4_monotonicity_check,
)
from radarkit.services.simulation import simulate_engagement
from radarkit.utils import rng
from radarkit.utils.serialization import (
    read_dataset,
    trace_to_dict,
    trace_to_frame,
    write_csv,
    write_dataset,
    write_json,
)
from radarkit.utils.stats import stable_mean, standard_error

logger = logging.getLogger(__name__)

ORACLE_SAMPLES = 1000


@dataclass
class RunOutcome:
    status: str = "ok"
    exit_status: int = 0
    artifacts: List[str] = field(default_factory=list)
    headline: Dict[str, Any] = field(default_factory=dict)
    flags: Dict[str, bool] = field(default_factory=dict)
    report: Dict[str, Any] = field(default_factory=dict)


def _path(workdir: str, name: str) -> str:
    return os.path.join(workdir, name)


def _utility(params: UtilityParams):
    if params.kind == "leontief":
        return Leontief(params.weights)
    return CobbDouglas(params.weights)


# ---------------------------------------------------------------- rastreamento


def _run_inverse_kf(p: InverseKFParams, seed: int, workdir: str) -> RunOutcome:
    model, action_map = p.model.to_model(), p.model.to_action_map()
    trace = simulate_engagement(model, action_map, p.horizon, seed)
    beliefs = inverse_kalman_run(model, action_map, trace, p.form, p.paper_literal_qbar)
    outcome = RunOutcome()
    outcome.artifacts.append(write_csv(_path(workdir, "trace.csv"), trace_to_frame(trace, beliefs)))
    outcome.artifacts.append(write_json(_path(workdir, "trace.json"), trace_to_dict(trace)))

    estimates = np.vstack([b.mean for b in beliefs])
    sup_error = float(np.max(np.abs(estimates - trace.adversary_means)))

    traces = simulate_ensemble(model, action_map, p.horizon, p.ensemble_size, seed)

    def member(member_trace) -> float:
        member_beliefs = inverse_kalman_run(model, action_map, member_trace, p.form, p.paper_literal_qbar)
        errors = np.vstack([b.mean for b in member_beliefs]) - member_trace.adversary_means
        return float(np.mean(np.sum(errors ** 2, axis=1)))

    squared_errors = ensemble_runner.map(member, traces, label="inverse KF consistency")
    mean_sq = stable_mean(squared_errors)
    se = standard_error(squared_errors)
    mean_sigma_bar = float(np.mean([np.trace(b.cov) for b in beliefs]))
    z_score = (mean_sq - mean_sigma_bar) / se if se > 0 else 0.0

    outcome.headline = {
        "sup_error_single_trace": sup_error,
        "time_avg_squared_error": mean_sq,
        "time_avg_sigma_bar": mean_sigma_bar,
        "consistency_z": z_score,
    }
    outcome.flags = {"filter_consistent_within_3se": abs(z_score) <= 3.0}
    outcome.report = dict(outcome.headline, ensemble_size=p.ensemble_size, horizon=p.horizon)
    return outcome


def _run_particle_vs_kf(p: ParticleVsKFParams, seed: int, workdir: str) -> RunOutcome:
    model, action_map = p.model.to_model(), p.model.to_action_map()
    trace = simulate_engagement(model, action_map, p.horizon, seed)
    beliefs = inverse_kalman_run(model, action_map, trace)
    clouds = inverse_particle_filter(model, action_map, trace, p.particle_count, rng.derive_seed(seed, 1))

    kf = np.vstack([b.mean for b in beliefs])
    pf = np.vstack([c.mean for c in clouds])
    se = np.vstack([c.standard_error() for c in clouds])
    within = np.all(np.abs(pf - kf) <= 3.0 * se, axis=1)

    data: Dict[str, Any] = {"k": np.arange(1, trace.horizon + 1)}
    for i in range(model.x_dim):
        data[f"kf_mean_{i + 1}"] = kf[:, i]
        data[f"pf_mean_{i + 1}"] = pf[:, i]
        data[f"pf_se_{i + 1}"] = se[:, i]
    data["ess"] = [c.ess for c in clouds]
    data["resampled"] = [int(c.resampled) for c in clouds]
    data["within_3se"] = within.astype(int)

    outcome = RunOutcome()
    outcome.artifacts.append(write_csv(_path(workdir, "particle_vs_kf.csv"), pd.DataFrame(data)))
    fraction = float(np.mean(within))
    outcome.headline = {"fraction_within_3se": fraction, "particle_count": p.particle_count}
    outcome.flags = {"particle_matches_kalman_95pct": fraction >= 0.95}
    outcome.report = dict(outcome.headline)
    return outcome


# ---------------------------------------------------------------- identificação


def _run_mle_gain(p: MleGainParams, seed: int, workdir: str) -> RunOutcome:
    model, action_map = p.model.to_model(), p.model.to_action_map()
    theta_true = float(model.C.reshape(-1)[0])
    traces = simulate_ensemble(model, action_map, p.horizon, p.ensemble_size, seed)
    grid = tuple(p.grid)

    estimates: Dict[EstimationMode, List[float]] = {}
    boundary: Dict[EstimationMode, List[bool]] = {}
    curves = {}
    for mode in p.modes:
        results = ensemble_runner.map(
            lambda trace, mode=mode: mle_gain(trace, model, action_map, mode, grid, p.refine_tol),
            traces,
            label=f"{mode.value} MLE",
        )
        estimates[mode] = [theta for theta, _ in results]
        boundary[mode] = [curve.boundary_hit for _, curve in results]
        curves[mode] = results[0][1]

    first = curves[p.modes[0]]
    curve_data: Dict[str, Any] = {"theta": first.thetas}
    for mode in p.modes:
        curve_data[f"loglik_{mode.value}"] = curves[mode].loglik
    estimate_data: Dict[str, Any] = {"seed_index": np.arange(len(traces))}
    for mode in p.modes:
        estimate_data[f"theta_{mode.value}"] = estimates[mode]
        estimate_data[f"boundary_{mode.value}"] = np.asarray(boundary[mode], dtype=int)

    outcome = RunOutcome()
    outcome.artifacts.append(write_csv(_path(workdir, "likelihood_curves.csv"), pd.DataFrame(curve_data)))
    outcome.artifacts.append(write_csv(_path(workdir, "mle_estimates.csv"), pd.DataFrame(estimate_data)))

    h = 1e-3 * max(1.0, abs(theta_true))
    summary: Dict[str, Any] = {"theta_true": theta_true}
    for mode in p.modes:
        values = np.asarray(estimates[mode])
        summary[f"{mode.value}_mean"] = float(np.mean(values))
        summary[f"{mode.value}_variance"] = float(np.var(values, ddof=1))
        summary[f"{mode.value}_curvature"] = mean_curvature(model, action_map, traces, theta_true, h, mode)
    tolerance = {EstimationMode.CLASSIC: 0.1, EstimationMode.INVERSE: 0.5}
    for mode in p.modes:
        hits = np.abs(np.asarray(estimates[mode]) - theta_true) <= tolerance[mode]
        summary[f"{mode.value}_fraction_within_{tolerance[mode]}"] = float(np.mean(hits))

    outcome.headline = summary
    for mode in p.modes:
        outcome.flags[f"{mode.value}_within_{tolerance[mode]}_90pct"] = (
            summary[f"{mode.value}_fraction_within_{tolerance[mode]}"] >= 0.9
        )
    if EstimationMode.CLASSIC in p.modes and EstimationMode.INVERSE in p.modes:
        outcome.flags.update({
            "classic_variance_below_inverse": summary["classic_variance"] < summary["inverse_variance"],
            "classic_curvature_above_inverse": abs(summary["classic_curvature"]) > abs(summary["inverse_curvature"]),
        })
    outcome.report = dict(summary, grid=list(grid), ensemble_size=p.ensemble_size)
    return outcome


def _run_sensitivity(p: SensitivityParams, seed: int, workdir: str) -> RunOutcome:
    action_map = p.model.to_action_map()
    rows = []
    for index, gain in enumerate(p.gains):
        model = p.model.to_model(gain)
        traces = simulate_ensemble(model, action_map, p.horizon, p.ensemble_size, rng.derive_seed(seed, index))
        for mode in p.modes:
            report = sensitivity(model, action_map, traces, mode, p.steps)
            rows.append({"gain": gain, **report.to_dict()})

    frame = pd.DataFrame([
        {k: row[k] for k in ("gain", "mode", "eta_Q", "eta_R", "eta_Q_halved", "eta_R_halved", "converged")}
        for row in rows
    ])
    outcome = RunOutcome()
    outcome.artifacts.append(write_csv(_path(workdir, "sensitivity.csv"), frame))
    outcome.artifacts.append(write_json(_path(workdir, "sensitivity.json"), rows))

    def eta(gain: float, mode: str, which: str) -> float:
        return next(r[which] for r in rows if r["gain"] == gain and r["mode"] == mode)

    modes = [m.value for m in p.modes]
    gains = sorted(p.gains)
    flags = {
        "eta_Q_negative": all(r["eta_Q"] < 0 for r in rows),
        "eta_R_negative": all(r["eta_R"] < 0 for r in rows),
        "eta_R_dominates_eta_Q": all(abs(r["eta_R"]) > abs(r["eta_Q"]) for r in rows),
        "sensitivity_decreases_with_gain": all(
            abs(eta(lo, mode, which)) > abs(eta(hi, mode, which))
            for lo, hi in zip(gains, gains[1:]) for mode in modes for which in ("eta_Q", "eta_R")
        ),
    }
    if {"classic", "inverse"} <= set(modes):
        flags["classic_exceeds_inverse"] = all(
            abs(eta(g, "classic", which)) > abs(eta(g, "inverse", which))
            for g in gains for which in ("eta_Q", "eta_R")
        )
    outcome.flags = flags
    outcome.headline = {f"{r['mode']}@{r['gain']}": f"eta_Q={r['eta_Q']:.4g}, eta_R={r['eta_R']:.4g}" for r in rows}
    outcome.report = {"rows": rows}
    return outcome


def _run_crb(p: CrbParams, seed: int, workdir: str) -> RunOutcome:
    action_map = p.model.to_action_map()
    rows = []
    for index, gain in enumerate(p.gains):
        model = p.model.to_model(gain)
        member_seed = rng.derive_seed(seed, index)
        classic = crb_gain(model, action_map, EstimationMode.CLASSIC, p.ensemble_size, member_seed, p.horizon)
        inverse = crb_gain(model, action_map, EstimationMode.INVERSE, p.ensemble_size, member_seed, p.horizon)
        rows.append({"gain": gain, "crb_classic": classic, "crb_inverse": inverse, "ratio": inverse / classic})

    outcome = RunOutcome()
    outcome.artifacts.append(write_csv(_path(workdir, "crb.csv"), pd.DataFrame(rows)))
    outcome.flags = {
        "inverse_exceeds_classic": all(r["crb_inverse"] > r["crb_classic"] for r in rows),
        "ratio_above_5": all(r["ratio"] > 5.0 for r in rows),
    }
    outcome.headline = {f"ratio@{r['gain']}": r["ratio"] for r in rows}
    outcome.report = {"rows": rows, "ensemble_size": p.ensemble_size}
    return outcome


# ---------------------------------------------------------------- preferência revelada


def _random_probes(seed: int, count: int, dim: int, bounds) -> np.ndarray:
    generator = rng.stream(seed, rng.STREAM_DATASET)
    return generator.uniform(bounds[0], bounds[1], size=(count, dim))


def _linear_dataset(p: RpLinearParams, seed: int) -> RPDataset:
    utility = _utility(p.utility)
    if p.source == "file":
        return read_dataset(p.dataset_path)
    if p.source == "beam":
        return beam_scenario([t.to_model() for t in p.targets], p.observations, utility, p.p_star)

    probes = _random_probes(seed, p.observations, len(p.utility.weights), p.probe_range)
    dataset = synth_responder(BudgetSpec.linear(p.p_star), utility, probes)
    if p.perturbation <= 0.0:
        return dataset
    generator = rng.stream(seed, rng.STREAM_DATASET, 1)
    shaken = dataset.responses * np.exp(p.perturbation * generator.standard_normal(dataset.responses.shape))
    shaken = shaken / np.sum(shaken * dataset.probes, axis=1, keepdims=True)
    return RPDataset(probes=dataset.probes, responses=shaken, budget=BudgetSpec.linear(1.0))


def _run_rp_linear(p: RpLinearParams, seed: int, workdir: str) -> RunOutcome:
    dataset = _linear_dataset(p, seed)
    garp = garp_check(dataset)
    afriat = afriat_feasibility(dataset)

    outcome = RunOutcome()
    outcome.artifacts.extend(write_dataset(_path(workdir, "dataset.csv"), dataset))
    outcome.artifacts.append(write_json(_path(workdir, "garp.json"), garp.to_dict()))
    outcome.artifacts.append(write_json(_path(workdir, "afriat.json"), afriat.to_dict()))
    outcome.headline = {
        "observations": dataset.size,
        "garp": "pass" if garp.passed else f"fail, cycle {list(garp.cycle)}",
        "afriat": "rational" if afriat.rational else "irrational",
    }
    outcome.flags = {"garp_agrees_with_afriat": garp.passed == afriat.rational}
    outcome.report = {"garp": garp.to_dict(), "afriat": afriat.to_dict(), "source": p.source}
    return outcome


def _run_rp_sinr(p: RpSinrParams, seed: int, workdir: str) -> RunOutcome:
    Q = np.diag(p.Q_diag)
    budget = BudgetSpec.sinr(Q, p.gamma, p.delta, P_builder=DiagonalLoadingBuilder(p.loading))
    probes = _random_probes(seed, p.observations, len(p.Q_diag), p.probe_range)
    dataset = synth_responder(budget, _utility(p.utility), probes)

    garp = nonlinear_garp(dataset)
    afriat = afriat_feasibility(dataset)
    P_alphas = [budget.P(alpha) for alpha in dataset.probes]
    verbatim = thm4_monotonicity_check(Q, P_alphas)
    relaxed = thm4_monotonicity_check(Q, P_alphas, relaxed=True)

    generator = rng.stream(seed, rng.STREAM_DATASET, 2)
    betas = generator.uniform(0.0, 1.0, size=(ORACLE_SAMPLES, len(p.Q_diag))) + 1e-6
    min_gradient = min(float(np.min(budget_gradient_oracle(Q, P, p.gamma, betas))) for P in P_alphas)

    outcome = RunOutcome()
    outcome.artifacts.extend(write_dataset(_path(workdir, "dataset.csv"), dataset))
    outcome.artifacts.append(write_json(_path(workdir, "rationality.json"), {
        "nonlinear_garp": garp.to_dict(),
        "afriat": afriat.to_dict(),
        "monotonicity_verbatim": verbatim.to_dict(),
        "monotonicity_relaxed": relaxed.to_dict(),
        "min_budget_gradient": min_gradient,
    }))
    outcome.headline = {
        "nonlinear_garp": "pass" if garp.passed else "fail",
        "afriat": "rational" if afriat.rational else "irrational",
        "monotonicity_verbatim": "monotone" if verbatim.monotone else f"not certified ({verbatim.reason})",
        "monotonicity_relaxed": "monotone" if relaxed.monotone else f"not certified ({relaxed.reason})",
        "min_budget_gradient": min_gradient,
    }
    outcome.flags = {
        "nonlinear_garp_pass": garp.passed,
        "garp_agrees_with_afriat": garp.passed == afriat.rational,
        "budget_increasing_on_samples": min_gradient >= -1e-8,
    }
    outcome.report = dict(outcome.headline)
    return outcome


# ---------------------------------------------------------------- interferência


def _channel(params: ChannelParams) -> MimoChannel:
    return MimoChannel(
        H_t=channel_array(params.H_t),
        H_c=channel_array(params.H_c),
        radar_noise_var=params.radar_noise_var,
        our_noise_var=params.our_noise_var,
        dims=params.dims,
    )


def _shapes(shapes) -> np.ndarray:
    return np.stack([channel_array(shape) for shape in shapes])


def _run_waveform_opt(p: WaveformParams, seed: int, workdir: str) -> RunOutcome:
    channel = _channel(p.channel)
    plan = ProbePlan.scaled(_shapes(p.probe_shapes), p.r, p.lag)
    records = simulate_pulses(channel, plan, seed)

    rows = []
    for record in records:
        row: Dict[str, Any] = {
            "pulse": record.pulse,
            "scnr_max": record.solution.scnr_max,
            "eigenvalue": record.solution.eigenvalue,
            "degenerate": int(record.solution.degenerate),
        }
        for i, (w, y) in enumerate(zip(record.solution.waveform, record.observation)):
            row[f"w_re_{i + 1}"] = float(np.real(w))
            row[f"w_im_{i + 1}"] = float(np.imag(w))
            row[f"y_re_{i + 1}"] = float(np.real(y))
            row[f"y_im_{i + 1}"] = float(np.imag(y))
        rows.append(row)

    outcome = RunOutcome()
    outcome.artifacts.append(write_csv(_path(workdir, "pulses.csv"), pd.DataFrame(rows)))
    outcome.headline = {f"scnr_max_pulse_{r['pulse']}": r["scnr_max"] for r in rows}
    outcome.flags = {"eigenvalue_matches_scnr": all(
        abs(r["scnr_max"] - r["eigenvalue"]) <= 1e-9 * max(1.0, abs(r["eigenvalue"])) for r in rows
    )}
    outcome.report = {"pulses": rows, "r": p.r, "lag": p.lag.value}
    return outcome


def _run_interference_design(p: InterferenceParams, seed: int, workdir: str) -> RunOutcome:
    channel = _channel(p.channel)
    shapes = _shapes(p.probe_shapes)
    lo, hi, count = p.r_grid
    deltas = sorted(p.deltas)

    rows = []
    for r in np.linspace(lo, hi, int(count)):
        plan = ProbePlan.scaled(shapes, float(r), p.lag)
        per_pulse = {
            pulse: scnr_samples(channel, plan, pulse, p.mc_samples, seed, p.normalize)
            for pulse in plan.constrained_pulses()
        }
        for delta in deltas:
            row: Dict[str, Any] = {"r": float(r), "delta": delta}
            worst = None
            for pulse, (values, solution) in per_pulse.items():
                estimate = estimate_from_samples(values, delta)
                row[f"p_hat_pulse_{pulse}"] = estimate.p_hat
                row[f"ci_pulse_{pulse}"] = estimate.ci_halfwidth
                row[f"scnr_max_pulse_{pulse}"] = solution.scnr_max
                if worst is None or estimate.p_hat < worst.p_hat:
                    worst = estimate
            row["p_hat"] = worst.p_hat
            row["ci"] = worst.ci_halfwidth
            rows.append(row)
    sweep = pd.DataFrame(rows).sort_values(["delta", "r"], kind="mergesort").reset_index(drop=True)
    ordered = ["r", "delta", "p_hat", "ci"] + [c for c in sweep.columns if c not in ("r", "delta", "p_hat", "ci")]
    sweep = sweep[ordered]

    designs = []
    for delta in deltas:
        for epsilon in sorted(p.epsilons):
            spec = ChanceSpec(delta=delta, epsilon=epsilon, mc_samples=p.mc_samples, seed=seed, normalize=p.normalize)
            designs.append(design_interference(channel, shapes, spec, (lo, hi, int(count)), p.lag))
    design_rows = [d.to_dict() for d in designs]

    outcome = RunOutcome()
    outcome.artifacts.append(write_csv(_path(workdir, "interference_sweep.csv"), sweep))
    outcome.artifacts.append(write_csv(_path(workdir, "designs.csv"), pd.DataFrame(design_rows)))

    by_delta = {d: sweep[sweep["delta"] == d].reset_index(drop=True) for d in deltas}
    nondecreasing_in_delta = all(
        np.all(by_delta[b]["p_hat"].to_numpy() >= by_delta[a]["p_hat"].to_numpy())
        for a, b in zip(deltas, deltas[1:])
    )
    nondecreasing_in_r = all(
        np.all(np.diff(frame["p_hat"].to_numpy())
               >= -3.0 * np.maximum(frame["ci"].to_numpy()[1:], frame["ci"].to_numpy()[:-1]))
        for frame in by_delta.values()
    )

    def r_star(delta: float, epsilon: float) -> float:
        design = next(d for d in designs if d.spec.delta == delta and d.spec.epsilon == epsilon)
        return design.r_star if design.r_star is not None else float("inf")

    epsilons = sorted(p.epsilons)
    outcome.flags = {
        "p_hat_nondecreasing_in_delta": bool(nondecreasing_in_delta),
        "p_hat_nondecreasing_in_r": bool(nondecreasing_in_r),
        "r_star_nonincreasing_in_delta": all(
            r_star(b, e) <= r_star(a, e) for a, b in zip(deltas, deltas[1:]) for e in epsilons
        ),
        "r_star_nonincreasing_in_epsilon": all(
            r_star(d, b) <= r_star(d, a) for a, b in zip(epsilons, epsilons[1:]) for d in deltas
        ),
    }
    outcome.headline = {f"r_star(delta={d.spec.delta}, eps={d.spec.epsilon})": d.r_star for d in designs}
    outcome.report = {"designs": design_rows, "lag": p.lag.value}
    if any(d.status is DesignStatus.INFEASIBLE for d in designs):
        outcome.status = "infeasible"
        outcome.exit_status = 4
    return outcome


RUNNERS: Dict[ExperimentKind, Callable[[Any, int, str], RunOutcome]] = {
    ExperimentKind.INVERSE_KF: _run_inverse_kf,
    ExperimentKind.PARTICLE_VS_KF: _run_particle_vs_kf,
    ExperimentKind.MLE_GAIN: _run_mle_gain,
    ExperimentKind.SENSITIVITY: _run_sensitivity,
    ExperimentKind.CRB: _run_crb,
    ExperimentKind.RP_LINEAR: _run_rp_linear,
    ExperimentKind.RP_SINR: _run_rp_sinr,
    ExperimentKind.WAVEFORM_OPT: _run_waveform_opt,
    ExperimentKind.INTERFERENCE_DESIGN: _run_interference_design,
}


def run_experiment(config: ExperimentConfig, workdir: str) -> RunOutcome:
    """Executa o experimento e grava seus artefatos em workdir"""
    logger.info(f"Running {config.kind.value} experiment (seed={config.seed})")
    outcome = RUNNERS[config.kind](config.typed_params(), config.seed, workdir)
    logger.info(f"Finished {config.kind.value}: status={outcome.status}, {len(outcome.artifacts)} artifacts")
    return outcome
