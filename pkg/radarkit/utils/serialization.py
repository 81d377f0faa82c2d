"""Leitura e escrita de artefatos: trajetórias, conjuntos de preferência
revelada e relatórios em JSON/CSV."""
import json
import os
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from radarkit.models.revealed import BudgetSpec, RPDataset
from radarkit.models.statespace import EngagementTrace, GaussianBelief
from radarkit.utils.errors import ConfigurationError, ValidationError

CSV_FLOAT_FORMAT = "%.17g"


def _to_builtin(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): _to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return _to_builtin(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def write_json(path: str, data: Any) -> str:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_to_builtin(data), f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    return path


def read_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_csv(path: str, frame: pd.DataFrame) -> str:
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return path


def _columns(prefix: str, block: np.ndarray) -> Dict[str, np.ndarray]:
    return {f"{prefix}_{i + 1}": block[:, i] for i in range(block.shape[1])}


def trace_to_frame(trace: EngagementTrace, beliefs: Optional[Sequence[GaussianBelief]] = None) -> pd.DataFrame:
    """Uma linha por k = 1..N; colunas x̂̂ e diag Σ̄ quando as crenças inversas são dadas"""
    data: Dict[str, Any] = {"k": np.arange(1, trace.horizon + 1)}
    data.update(_columns("x", trace.states))
    data.update(_columns("y", trace.observations))
    data.update(_columns("xhat", trace.adversary_means))
    data.update(_columns("sigma_diag", np.diagonal(trace.adversary_covs, axis1=1, axis2=2)))
    data.update(_columns("a", trace.actions))
    if beliefs is not None:
        if len(beliefs) != trace.horizon:
            raise ValidationError(
                "Crenças e trajetória com tamanhos diferentes",
                {"beliefs": len(beliefs), "trace": trace.horizon}
            )
        data.update(_columns("xhathat", np.vstack([b.mean for b in beliefs])))
        data.update(_columns("sigmabar_diag", np.vstack([np.diag(b.cov) for b in beliefs])))
    return pd.DataFrame(data)


def trace_to_dict(trace: EngagementTrace) -> Dict[str, Any]:
    return {
        "seed": trace.seed,
        "initial_state": trace.initial_state.tolist(),
        "states": trace.states.tolist(),
        "observations": trace.observations.tolist(),
        "adversary_means": trace.adversary_means.tolist(),
        "adversary_covs": trace.adversary_covs.tolist(),
        "actions": trace.actions.tolist(),
    }


def trace_from_dict(data: Dict[str, Any]) -> EngagementTrace:
    try:
        return EngagementTrace(
            initial_state=data["initial_state"],
            states=data["states"],
            observations=data["observations"],
            adversary_means=data["adversary_means"],
            adversary_covs=data["adversary_covs"],
            actions=data["actions"],
            seed=data["seed"],
        )
    except KeyError as e:
        raise ConfigurationError("Campo ausente na trajetória", {"missing": [str(e)]})


def dataset_to_frame(dataset: RPDataset) -> pd.DataFrame:
    """Cabeçalho n, alpha_1..alpha_m, beta_1..beta_m (sondas na forma canônica)"""
    data: Dict[str, Any] = {"n": np.arange(1, dataset.size + 1)}
    data.update(_columns("alpha", dataset.probes))
    data.update(_columns("beta", dataset.responses))
    return pd.DataFrame(data)


def sidecar_path(csv_path: str) -> str:
    root, _ = os.path.splitext(csv_path)
    return f"{root}.budget.json"


def write_dataset(csv_path: str, dataset: RPDataset) -> List[str]:
    write_csv(csv_path, dataset_to_frame(dataset))
    write_json(sidecar_path(csv_path), dataset.budget.to_dict())
    return [csv_path, sidecar_path(csv_path)]


def read_dataset(csv_path: str) -> RPDataset:
    frame = pd.read_csv(csv_path, float_precision="round_trip")
    alpha_cols = sorted((c for c in frame.columns if c.startswith("alpha_")), key=lambda c: int(c.split("_")[1]))
    beta_cols = sorted((c for c in frame.columns if c.startswith("beta_")), key=lambda c: int(c.split("_")[1]))
    if not alpha_cols or len(alpha_cols) != len(beta_cols):
        raise ConfigurationError(
            "CSV de preferência revelada inválido",
            {"columns": list(frame.columns)}
        )
    sidecar = sidecar_path(csv_path)
    budget = BudgetSpec.from_dict(read_json(sidecar)) if os.path.exists(sidecar) else BudgetSpec.linear(1.0)
    return RPDataset(
        probes=frame[alpha_cols].to_numpy(dtype=float),
        responses=frame[beta_cols].to_numpy(dtype=float),
        budget=budget,
    )
