"""Experimentos de referência distribuídos com o pacote."""
import copy
from typing import Any, Dict, List

from radarkit.models.config import ExperimentConfig
from radarkit.utils.errors import ConfigurationError

PRESETS: Dict[str, Dict[str, Any]] = {
    "fig3": {
        "description": "Curvas de log-verossimilhança clássica e inversa do ganho C sobre (0, 10]",
        "config": {
            "kind": "mle_gain",
            "params": {"model": {"C": 2.5}, "horizon": 500, "ensemble_size": 50, "grid": [0.01, 10.0, 1000]},
        },
    },
    "table1_pattern": {
        "description": "Sensibilidade do MLE a erros em Q e R, clássico vs inverso, C° ∈ {2.5, 3.5}",
        "config": {
            "kind": "sensitivity",
            "params": {"horizon": 500, "ensemble_size": 50, "gains": [2.5, 3.5]},
        },
    },
    "table2_pattern": {
        "description": "Limite de Cramér-Rao do ganho, clássico vs inverso, C° ∈ {0.5, 1.5, 2, 3}",
        "config": {
            "kind": "crb",
            "params": {"horizon": 500, "ensemble_size": 100, "gains": [0.5, 1.5, 2.0, 3.0]},
        },
    },
    "rp_beam": {
        "description": "GARP e Afriat sobre a alocação de feixe em malha fechada com três alvos",
        "config": {
            "kind": "rp_linear",
            "params": {
                "source": "beam",
                "observations": 20,
                "utility": {"kind": "cobb_douglas", "weights": [1.0, 2.0, 3.0]},
                "targets": [
                    {"A": 0.9, "C": 1.0, "Q": 1.0, "R": 1.0},
                    {"A": 0.95, "C": 1.0, "Q": 0.5, "R": 2.0},
                    {"A": 0.8, "C": 1.0, "Q": 2.0, "R": 0.5},
                ],
            },
        },
    },
    "rp_sinr": {
        "description": "GARP não linear e condições de monotonia no orçamento SINR",
        "config": {
            "kind": "rp_sinr",
            "params": {"Q_diag": [4.0, 5.0], "gamma": 1.0, "delta": 1.0, "observations": 10},
        },
    },
    "fig5": {
        "description": "Probabilidade da restrição de chance e r* para Δ ∈ {2.8, 3, 3.2}, ε ∈ {0.2, 0.3}",
        "config": {
            "kind": "interference_design",
            "params": {
                "deltas": [2.8, 3.0, 3.2],
                "epsilons": [0.2, 0.3],
                "mc_samples": 10_000,
                "r_grid": [0.0, 100.0, 101],
                "lag": "simultaneous",
            },
        },
    },
}


def list_presets() -> List[Dict[str, str]]:
    """Nomes e descrições na ordem de distribuição"""
    return [{"name": name, "description": entry["description"]} for name, entry in PRESETS.items()]


def load_preset(name: str, seed: int = 0) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigurationError(
            f"Preset desconhecido: {name}",
            {"preset": [f"disponíveis: {', '.join(PRESETS)}"]}
        )
    payload = copy.deepcopy(PRESETS[name]["config"])
    payload["seed"] = seed
    payload["name"] = name
    return ExperimentConfig.model_validate(payload)
