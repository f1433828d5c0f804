"""
Central-difference gradient check for tape gradients
"""
from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from autodiff.tensor import Tensor, no_grad
from models.exceptions import NonFiniteError, ShapeError

_TINY = 1e-12


def grad_check(
    f: Callable[..., Tensor],
    inputs: Sequence[Tensor],
    eps: float = 1e-5,
    max_coords: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """Worst relative error between tape and finite-difference gradients.

    Per input the error is ‖g_tape − g_fd‖ / max(‖g_tape‖, ‖g_fd‖) over the
    checked coordinates. `max_coords` samples a random subset per input.
    """
    for t in inputs:
        t.requires_grad = True
        t.grad = None
        if not t.data.flags.writeable or not t.data.flags.c_contiguous:
            t.data = np.array(t.data, dtype=np.float64, order="C")

    out = f(*inputs)
    if out.size != 1:
        raise ShapeError(f"grad_check needs a scalar function, got shape {out.shape}")
    out.backward()
    analytic = [np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in inputs]

    rng = rng or np.random.default_rng(0)
    worst = 0.0
    with no_grad():
        for t, tape in zip(inputs, analytic):
            flat = t.data.reshape(-1)
            coords = np.arange(flat.size)
            if max_coords is not None and flat.size > max_coords:
                coords = np.sort(rng.choice(flat.size, size=max_coords, replace=False))
            numeric = np.empty(coords.size)
            for n, c in enumerate(coords):
                original = flat[c]
                flat[c] = original + eps
                plus = f(*inputs).item()
                flat[c] = original - eps
                minus = f(*inputs).item()
                flat[c] = original
                if not (np.isfinite(plus) and np.isfinite(minus)):
                    raise NonFiniteError(f"non-finite value while perturbing coordinate {c}")
                numeric[n] = (plus - minus) / (2.0 * eps)
            a = tape.reshape(-1)[coords]
            scale = max(float(np.linalg.norm(a)), float(np.linalg.norm(numeric)), _TINY)
            worst = max(worst, float(np.linalg.norm(a - numeric)) / scale)
    return worst
