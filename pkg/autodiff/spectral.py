"""
Spectral normalization by power iteration with a persistent left vector
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from autodiff.tensor import Tensor, as_tensor, div, mul, reshape, tsum
from models.exceptions import SpectralError

logger = logging.getLogger(__name__)

_TINY = 1e-12


def _normalize(v: np.ndarray) -> np.ndarray:
    return v / max(float(np.linalg.norm(v)), _TINY)


@dataclass
class SpectralState:
    """Running estimate of the top left singular vector of one weight matrix"""

    u: np.ndarray
    iterations_per_step: int = 1

    @classmethod
    def init(cls, rows: int, rng: np.random.Generator, iterations_per_step: int = 1) -> "SpectralState":
        return cls(u=_normalize(rng.normal(size=rows)), iterations_per_step=iterations_per_step)


def as_matrix(w: np.ndarray) -> np.ndarray:
    """(out, in, k, k) kernels flatten to (out, in·k·k)"""
    return w.reshape(w.shape[0], -1)


def power_iteration(matrix: np.ndarray, u: np.ndarray, iterations: int) -> Tuple[np.ndarray, np.ndarray]:
    """Returns unit (u, v) after `iterations` rounds; v is always refreshed from u"""
    if not np.any(matrix):
        raise SpectralError(f"spectral norm of a zero {matrix.shape[0]}×{matrix.shape[1]} matrix")
    v = _normalize(matrix.T @ u)
    for _ in range(iterations):
        u = _normalize(matrix @ v)
        v = _normalize(matrix.T @ u)
    return u, v


def estimate_sigma(matrix: np.ndarray, iterations: int = 50, rng: np.random.Generator | None = None) -> float:
    """Fresh power-iteration estimate of the top singular value"""
    rng = rng or np.random.default_rng(0)
    u, v = power_iteration(matrix, _normalize(rng.normal(size=matrix.shape[0])), iterations)
    return float(u @ matrix @ v)


def spectral_normalize(w: Tensor, state: SpectralState, update: bool = True) -> Tensor:
    """w / σ̂ with σ̂ = uᵀ W v; u and v are constants for the gradient.

    With `update` the state's u advances by `iterations_per_step` rounds.
    """
    w = as_tensor(w)
    matrix = as_matrix(w.data)
    u, v = power_iteration(matrix, state.u, state.iterations_per_step if update else 0)
    if update:
        state.u = u
    sigma = tsum(mul(reshape(w, matrix.shape), np.outer(u, v)))
    if sigma.item() <= _TINY:
        raise SpectralError(f"estimated spectral norm {sigma.item():.3e} is not positive")
    return div(w, sigma)


def warm_up(w: np.ndarray, state: SpectralState, iterations: int = 30) -> None:
    """Advance u without touching weights, so the first normalized pass starts near σ"""
    matrix = as_matrix(w)
    state.u, v = power_iteration(matrix, state.u, iterations)
    logger.debug("spectral warm-up: σ̂ = %.4f", float(state.u @ matrix @ v))
