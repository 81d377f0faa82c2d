from typing import Any, Dict, Optional

import numpy as np

from radarkit.utils.errors import ConfigurationError, NumericalError, ValidationError

SYMMETRY_TOL = 1e-12
PSD_CLAMP_TOL = 1e-12
MAX_CONDITION = 1e12


class MatrixValidator:
    @staticmethod
    def as_matrix(value: Any, name: str, dtype=float) -> np.ndarray:
        """Converte para matriz 2-D (escalares viram 1x1)"""
        arr = np.asarray(value, dtype=dtype)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2:
            raise ConfigurationError(
                f"{name} deve ser uma matriz",
                {name: [f"ndim esperado 2, recebido {arr.ndim}"]}
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError(
                f"{name} contém valores não finitos",
                {name: ["NaN ou infinito encontrado"]}
            )
        return arr

    @staticmethod
    def as_vector(value: Any, name: str, dtype=float) -> np.ndarray:
        """Converte para vetor 1-D (escalares viram tamanho 1)"""
        arr = np.asarray(value, dtype=dtype)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        if arr.ndim != 1:
            raise ConfigurationError(
                f"{name} deve ser um vetor",
                {name: [f"ndim esperado 1, recebido {arr.ndim}"]}
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError(
                f"{name} contém valores não finitos",
                {name: ["NaN ou infinito encontrado"]}
            )
        return arr

    @staticmethod
    def require_shape(arr: np.ndarray, shape: tuple, name: str) -> None:
        if arr.shape != shape:
            raise ConfigurationError(
                f"Dimensão inconsistente em {name}",
                {name: [f"esperado {shape}, recebido {arr.shape}"]}
            )

    @staticmethod
    def require_symmetric(arr: np.ndarray, name: str, tol: float = SYMMETRY_TOL) -> None:
        if arr.shape[0] != arr.shape[1]:
            raise ConfigurationError(
                f"{name} deve ser quadrada",
                {name: [f"forma recebida {arr.shape}"]}
            )
        asym = float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0
        scale = max(1.0, float(np.max(np.abs(arr)))) if arr.size else 1.0
        if asym > tol * scale:
            raise ValidationError(
                f"{name} não é simétrica",
                {name: [f"assimetria máxima {asym:.3e}"]}
            )

    @staticmethod
    def require_spd(arr: np.ndarray, name: str) -> None:
        """Simétrica com menor autovalor estritamente positivo"""
        MatrixValidator.require_symmetric(arr, name)
        eig_min = float(np.min(np.linalg.eigvalsh(arr))) if arr.size else 1.0
        if not eig_min > 0.0:
            raise ValidationError(
                f"{name} não é positiva definida",
                {name: [f"menor autovalor {eig_min:.3e}"]}
            )

    @staticmethod
    def clamp_psd(arr: np.ndarray, name: str) -> np.ndarray:
        """Simetriza e zera autovalores em [-tol, 0); abaixo disso é erro"""
        MatrixValidator.require_symmetric(arr, name)
        sym = 0.5 * (arr + arr.T)
        if not sym.size:
            return sym
        vals, vecs = np.linalg.eigh(sym)
        scale = max(1.0, float(np.max(np.abs(vals))))
        if vals.min() < -PSD_CLAMP_TOL * scale:
            raise ValidationError(
                f"{name} não é semi-definida positiva",
                {name: [f"menor autovalor {vals.min():.3e}"]}
            )
        if vals.min() < 0.0:
            vals = np.clip(vals, 0.0, None)
            sym = (vecs * vals) @ vecs.T
            sym = 0.5 * (sym + sym.T)
        return sym

    @staticmethod
    def checked_inverse(arr: np.ndarray, name: str, max_condition: float = MAX_CONDITION) -> np.ndarray:
        """Inverte levantando NumericalError com a estimativa de condição"""
        cond = float(np.linalg.cond(arr)) if arr.size else 1.0
        if not np.isfinite(cond) or cond >= max_condition:
            raise NumericalError(
                f"{name} singular ou mal condicionada",
                {"matrix": name, "condition": cond if np.isfinite(cond) else "inf"}
            )
        return np.linalg.inv(arr)


def symmetrize(arr: np.ndarray) -> np.ndarray:
    return 0.5 * (arr + arr.T)


def require_positive(value: float, name: str, strict: bool = True, details: Optional[Dict[str, Any]] = None) -> float:
    value = float(value)
    ok = value > 0.0 if strict else value >= 0.0
    if not ok or not np.isfinite(value):
        rule = "> 0" if strict else ">= 0"
        raise ValidationError(
            f"{name} deve ser {rule}",
            details or {name: [f"recebido {value}"]}
        )
    return value
