"""Esquemas de configuração de experimentos (JSON estrito).

Cada tipo de experimento tem seu próprio esquema de parâmetros; chaves
desconhecidas são rejeitadas e os padrões resolvidos voltam em `params`,
de modo que o manifest.json reproduz a execução.
"""
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Type, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from radarkit.models.identification import EstimationMode
from radarkit.models.interference import ProbeLag
from radarkit.models.statespace import ActionMap, LinearGaussianModel, PhiKind
from radarkit.models.tracking import FilterForm

MatrixLike = Union[float, List[List[float]]]
VectorLike = Union[float, List[float]]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ExperimentKind(str, Enum):
    INVERSE_KF = "inverse_kf"
    PARTICLE_VS_KF = "particle_vs_kf"
    MLE_GAIN = "mle_gain"
    SENSITIVITY = "sensitivity"
    CRB = "crb"
    RP_LINEAR = "rp_linear"
    RP_SINR = "rp_sinr"
    WAVEFORM_OPT = "waveform_opt"
    INTERFERENCE_DESIGN = "interference_design"


class StateSpaceParams(StrictModel):
    """Modelo de referência escalar: A=0.9, C=2, Q=R=σ²_ε=1"""
    A: MatrixLike = 0.9
    C: MatrixLike = 2.0
    Q: MatrixLike = 1.0
    R: MatrixLike = 1.0
    prior_mean: VectorLike = 0.0
    prior_cov: MatrixLike = 1.0
    action_noise_var: float = Field(default=1.0, ge=0.0)
    phi_kind: PhiKind = PhiKind.IDENTITY

    def to_model(self, gain: Optional[float] = None) -> LinearGaussianModel:
        model = LinearGaussianModel(
            A=self.A, C=self.C, Q=self.Q, R=self.R,
            prior_mean=self.prior_mean, prior_cov=self.prior_cov,
        )
        return model if gain is None else model.with_gain(gain)

    def to_action_map(self) -> ActionMap:
        return ActionMap(phi_kind=self.phi_kind, action_noise_var=self.action_noise_var)


class InverseKFParams(StrictModel):
    model: StateSpaceParams = Field(default_factory=StateSpaceParams)
    horizon: int = Field(default=200, ge=1)
    form: FilterForm = FilterForm.COVARIANCE
    paper_literal_qbar: bool = False
    ensemble_size: int = Field(default=200, ge=2)


class ParticleVsKFParams(StrictModel):
    model: StateSpaceParams = Field(default_factory=StateSpaceParams)
    horizon: int = Field(default=200, ge=1)
    particle_count: int = Field(default=10_000, ge=2)


class MleGainParams(StrictModel):
    model: StateSpaceParams = Field(default_factory=lambda: StateSpaceParams(C=2.5))
    horizon: int = Field(default=500, ge=1)
    ensemble_size: int = Field(default=50, ge=2)
    grid: Tuple[float, float, int] = (0.01, 10.0, 1000)
    refine_tol: float = Field(default=1e-6, gt=0.0)
    modes: List[EstimationMode] = Field(default_factory=lambda: [EstimationMode.CLASSIC, EstimationMode.INVERSE])

    @field_validator("grid")
    @classmethod
    def validate_grid(cls, v):
        lo, hi, count = v
        if not (0.0 < lo < hi) or count < 2:
            raise ValueError("grid deve ser (lo, hi, count) com 0 < lo < hi e count >= 2")
        return v


class SensitivityParams(StrictModel):
    model: StateSpaceParams = Field(default_factory=StateSpaceParams)
    horizon: int = Field(default=500, ge=1)
    ensemble_size: int = Field(default=50, ge=1)
    gains: List[float] = Field(default_factory=lambda: [2.5, 3.5], min_length=1)
    modes: List[EstimationMode] = Field(default_factory=lambda: [EstimationMode.CLASSIC, EstimationMode.INVERSE])
    steps: Optional[Tuple[float, float, float]] = None


class CrbParams(StrictModel):
    model: StateSpaceParams = Field(default_factory=StateSpaceParams)
    horizon: int = Field(default=500, ge=1)
    ensemble_size: int = Field(default=100, ge=100)
    gains: List[float] = Field(default_factory=lambda: [0.5, 1.5, 2.0, 3.0], min_length=1)


class UtilityParams(StrictModel):
    kind: str = "cobb_douglas"
    weights: List[float] = Field(default_factory=lambda: [1.0, 1.0, 1.0], min_length=1)

    @field_validator("kind")
    @classmethod
    def validate_kind(cls, v):
        if v not in ("cobb_douglas", "leontief"):
            raise ValueError("kind deve ser 'cobb_douglas' ou 'leontief'")
        return v

    @field_validator("weights")
    @classmethod
    def validate_weights(cls, v):
        if any(w <= 0 for w in v):
            raise ValueError("pesos devem ser > 0")
        return v


class RpLinearParams(StrictModel):
    source: str = "synthetic"
    observations: int = Field(default=20, ge=1)
    probe_range: Tuple[float, float] = (0.5, 2.0)
    p_star: float = Field(default=1.0, gt=0.0)
    utility: UtilityParams = Field(default_factory=UtilityParams)
    perturbation: float = Field(default=0.0, ge=0.0)
    targets: List[StateSpaceParams] = Field(default_factory=list)
    dataset_path: Optional[str] = None

    @field_validator("source")
    @classmethod
    def validate_source(cls, v):
        if v not in ("synthetic", "beam", "file"):
            raise ValueError("source deve ser 'synthetic', 'beam' ou 'file'")
        return v

    @model_validator(mode="after")
    def check_source_inputs(self):
        if self.source == "file" and not self.dataset_path:
            raise ValueError("source 'file' exige dataset_path")
        if self.source == "beam" and len(self.targets) < 1:
            raise ValueError("source 'beam' exige ao menos um alvo em targets")
        if self.source == "beam" and len(self.targets) != len(self.utility.weights):
            raise ValueError("targets e utility.weights devem ter o mesmo tamanho")
        return self


class RpSinrParams(StrictModel):
    Q_diag: List[float] = Field(default_factory=lambda: [4.0, 5.0], min_length=1)
    gamma: float = Field(default=1.0, gt=0.0)
    delta: float = Field(default=1.0, gt=0.0)
    loading: float = Field(default=0.01, gt=0.0)
    observations: int = Field(default=10, ge=1)
    probe_range: Tuple[float, float] = (0.5, 2.0)
    utility: UtilityParams = Field(default_factory=lambda: UtilityParams(weights=[1.0, 2.0]))

    @model_validator(mode="after")
    def check_dims(self):
        if len(self.Q_diag) != len(self.utility.weights):
            raise ValueError("Q_diag e utility.weights devem ter o mesmo tamanho")
        if any(q <= 0 for q in self.Q_diag):
            raise ValueError("Q_diag deve ser > 0")
        return self


class ComplexMatrix(StrictModel):
    re: List[List[float]]
    im: Optional[List[List[float]]] = None

    def to_array(self) -> np.ndarray:
        real = np.asarray(self.re, dtype=float)
        if self.im is None:
            return real
        return real + 1j * np.asarray(self.im, dtype=float)


ChannelMatrix = Union[List[List[float]], ComplexMatrix]


def channel_array(value: ChannelMatrix) -> np.ndarray:
    if isinstance(value, ComplexMatrix):
        return value.to_array()
    return np.asarray(value, dtype=float)


class ChannelParams(StrictModel):
    """Cenário numérico de referência: H_t=[7 7], H_c=[1 1], σ̃²_r=1, σ̃²_o=0.1"""
    H_t: ChannelMatrix = Field(default_factory=lambda: [[7.0, 7.0]])
    H_c: ChannelMatrix = Field(default_factory=lambda: [[1.0, 1.0]])
    radar_noise_var: float = Field(default=1.0, gt=0.0)
    our_noise_var: float = Field(default=0.1, ge=0.0)
    dims: Optional[Tuple[int, int, int]] = None

    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {
                "H_t": [[7.0, 7.0]],
                "H_c": {"re": [[1.0, 1.0]], "im": [[0.0, 0.0]]},
                "radar_noise_var": 1.0,
                "our_noise_var": 0.1,
            }
        },
    )


def _default_shapes() -> List[ChannelMatrix]:
    return [[[0.2, 0.5]], [[0.4, 0.4]]]


class WaveformParams(StrictModel):
    channel: ChannelParams = Field(default_factory=ChannelParams)
    probe_shapes: List[ChannelMatrix] = Field(default_factory=_default_shapes, min_length=1)
    r: float = Field(default=10.0, ge=0.0)
    lag: ProbeLag = ProbeLag.ONE_STEP


class InterferenceParams(StrictModel):
    channel: ChannelParams = Field(default_factory=ChannelParams)
    probe_shapes: List[ChannelMatrix] = Field(default_factory=_default_shapes, min_length=1)
    deltas: List[float] = Field(default_factory=lambda: [2.8, 3.0, 3.2], min_length=1)
    epsilons: List[float] = Field(default_factory=lambda: [0.2, 0.3], min_length=1)
    mc_samples: int = Field(default=10_000, ge=100)
    r_grid: Tuple[float, float, int] = (0.0, 100.0, 101)
    lag: ProbeLag = ProbeLag.SIMULTANEOUS
    normalize: bool = False

    @field_validator("epsilons")
    @classmethod
    def validate_epsilons(cls, v):
        if any(not 0.0 <= e < 1.0 for e in v):
            raise ValueError("epsilon deve estar em [0, 1)")
        return v

    @field_validator("deltas")
    @classmethod
    def validate_deltas(cls, v):
        if any(d <= 0.0 for d in v):
            raise ValueError("delta deve ser > 0")
        return v

    @field_validator("r_grid")
    @classmethod
    def validate_r_grid(cls, v):
        lo, hi, count = v
        if lo < 0.0 or hi < lo or count < 1:
            raise ValueError("r_grid deve ser (lo, hi, count) com 0 <= lo <= hi e count >= 1")
        return v


PARAMS_BY_KIND: Dict[ExperimentKind, Type[StrictModel]] = {
    ExperimentKind.INVERSE_KF: InverseKFParams,
    ExperimentKind.PARTICLE_VS_KF: ParticleVsKFParams,
    ExperimentKind.MLE_GAIN: MleGainParams,
    ExperimentKind.SENSITIVITY: SensitivityParams,
    ExperimentKind.CRB: CrbParams,
    ExperimentKind.RP_LINEAR: RpLinearParams,
    ExperimentKind.RP_SINR: RpSinrParams,
    ExperimentKind.WAVEFORM_OPT: WaveformParams,
    ExperimentKind.INTERFERENCE_DESIGN: InterferenceParams,
}


class ExperimentConfig(StrictModel):
    """Configuração de uma execução; `params` é validado pelo esquema do `kind`"""
    kind: ExperimentKind
    params: Dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    output_dir: Optional[str] = None
    name: Optional[str] = None

    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {
                "kind": "mle_gain",
                "params": {"horizon": 500, "ensemble_size": 50, "grid": [0.01, 10.0, 1000]},
                "seed": 7,
                "output_dir": "runs/fig3",
            }
        },
    )

    @model_validator(mode="after")
    def resolve_params(self):
        typed = PARAMS_BY_KIND[self.kind].model_validate(self.params)
        self.params = typed.model_dump(mode="json")
        return self

    def typed_params(self) -> StrictModel:
        return PARAMS_BY_KIND[self.kind].model_validate(self.params)
