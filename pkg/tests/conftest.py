import numpy as np
import pytest

from radarkit.models.interference import MimoChannel
from radarkit.models.revealed import BudgetSpec, RPDataset
from radarkit.models.statespace import ActionMap, LinearGaussianModel


@pytest.fixture
def benchmark_model():
    """Modelo escalar de referência: A=0.9, C=2, Q=R=1"""
    return LinearGaussianModel.scalar(A=0.9, C=2.0, Q=1.0, R=1.0)


@pytest.fixture
def hand_model():
    """A=1, C=2, Q=R=Σ₀=1: os valores da substituição manual (ψ₁=4/9, Σ₁=2/9)"""
    return LinearGaussianModel.scalar(A=1.0, C=2.0, Q=1.0, R=1.0)


@pytest.fixture
def identity_map():
    return ActionMap(action_noise_var=1.0)


@pytest.fixture
def garp_pass_dataset():
    return RPDataset(
        probes=[[1.0, 2.0], [2.0, 1.0]],
        responses=[[0.5, 0.25], [0.25, 0.5]],
        budget=BudgetSpec.linear(),
    )


@pytest.fixture
def garp_fail_dataset():
    """Ciclo estrito de dois elementos: αᵀ₁β₂ < αᵀ₁β₁ e αᵀ₂β₁ < αᵀ₂β₂"""
    return RPDataset(
        probes=[[1.0, 2.0], [2.0, 1.0]],
        responses=[[1.0, 1.0], [2.0, 0.0]],
        budget=BudgetSpec.linear(),
    )


@pytest.fixture
def reference_channel():
    """Cenário numérico: H_t=[7 7], H_c=[1 1], σ̃²_r=1, σ̃²_o=0.1"""
    return MimoChannel(H_t=[[7.0, 7.0]], H_c=[[1.0, 1.0]], radar_noise_var=1.0, our_noise_var=0.1)


def random_linear_dataset(generator: np.random.Generator, size: int, dim: int) -> RPDataset:
    probes = generator.uniform(0.5, 2.0, size=(size, dim))
    raw = generator.uniform(0.1, 1.0, size=(size, dim))
    responses = raw / np.sum(raw * probes, axis=1, keepdims=True)
    return RPDataset(probes=probes, responses=responses, budget=BudgetSpec.linear())


@pytest.fixture
def make_linear_dataset():
    """Gerador de conjuntos lineares com respostas arbitrárias na fronteira αᵀβ = 1"""
    return random_linear_dataset
