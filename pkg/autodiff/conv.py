"""
Convolutions on NCHW tensors: im2col unfold, cross-correlation, gated conv
"""
from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from autodiff.tensor import ArrayLike, Tensor, _record, as_tensor, leaky_relu, matmul, mul, reshape, sigmoid
from models.exceptions import ShapeError

LEAKY_SLOPE = 0.2


def output_extent(size: int, k: int, stride: int = 1, dilation: int = 1, pad: int = 0) -> int:
    return (size + 2 * pad - dilation * (k - 1) - 1) // stride + 1


def _geometry(shape: Tuple[int, ...], k: int, stride: int, dilation: int, pad: int) -> Tuple[int, int]:
    if len(shape) != 4:
        raise ShapeError(f"expected NCHW input, got shape {shape}")
    if k < 1 or stride < 1 or dilation < 1 or pad < 0:
        raise ShapeError(f"bad conv geometry k={k} stride={stride} dilation={dilation} pad={pad}")
    ho = output_extent(shape[2], k, stride, dilation, pad)
    wo = output_extent(shape[3], k, stride, dilation, pad)
    if ho < 1 or wo < 1:
        raise ShapeError(f"conv output would be empty for input {shape[2]}×{shape[3]} and k={k}")
    return ho, wo


def unfold(x: ArrayLike, k: int, stride: int = 1, dilation: int = 1, pad: int = 0) -> Tensor:
    """Sliding k×k patches as columns: (N, C, H, W) -> (N, C·k·k, Ho·Wo)"""
    x = as_tensor(x)
    ho, wo = _geometry(x.shape, k, stride, dilation, pad)
    n, c, h, w = x.shape
    padded = np.pad(x.data, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    cols = np.empty((n, c, k, k, ho, wo))
    row_span, col_span = stride * (ho - 1) + 1, stride * (wo - 1) + 1
    for i in range(k):
        for j in range(k):
            y0, x0 = i * dilation, j * dilation
            cols[:, :, i, j] = padded[:, :, y0:y0 + row_span:stride, x0:x0 + col_span:stride]

    def backward(g):
        g = g.reshape(n, c, k, k, ho, wo)
        full = np.zeros_like(padded)
        for i in range(k):
            for j in range(k):
                y0, x0 = i * dilation, j * dilation
                full[:, :, y0:y0 + row_span:stride, x0:x0 + col_span:stride] += g[:, :, i, j]
        return (full[:, :, pad:pad + h, pad:pad + w],)

    return _record(cols.reshape(n, c * k * k, ho * wo), (x,), backward, "unfold")


def conv2d(
    x: ArrayLike,
    w: ArrayLike,
    b: Optional[ArrayLike] = None,
    stride: int = 1,
    dilation: int = 1,
    pad: int = 0,
) -> Tensor:
    """Zero-padded cross-correlation (no kernel flip); w is (O, I, k, k)"""
    x, w = as_tensor(x), as_tensor(w)
    if w.ndim != 4 or w.shape[2] != w.shape[3]:
        raise ShapeError(f"kernel must be O×I×k×k, got {w.shape}")
    if x.ndim != 4 or x.shape[1] != w.shape[1]:
        raise ShapeError(f"input channels {x.shape[1] if x.ndim == 4 else x.shape} vs kernel {w.shape[1]}")
    out_c, in_c, k, _ = w.shape
    ho, wo = _geometry(x.shape, k, stride, dilation, pad)
    cols = unfold(x, k, stride, dilation, pad)
    out = matmul(reshape(w, (out_c, in_c * k * k)), cols)
    out = reshape(out, (x.shape[0], out_c, ho, wo))
    if b is not None:
        b = as_tensor(b)
        if b.shape != (out_c,):
            raise ShapeError(f"bias shape {b.shape} vs {out_c} output channels")
        out = out + reshape(b, (1, out_c, 1, 1))
    return out


def gated_conv(
    x: ArrayLike,
    w_feat: ArrayLike,
    w_gate: ArrayLike,
    b_feat: Optional[ArrayLike] = None,
    b_gate: Optional[ArrayLike] = None,
    stride: int = 1,
    dilation: int = 1,
    pad: int = 0,
    slope: float = LEAKY_SLOPE,
) -> Tensor:
    """leaky(conv(x, w_feat)) ⊙ sigmoid(conv(x, w_gate))"""
    w_feat, w_gate = as_tensor(w_feat), as_tensor(w_gate)
    if w_feat.shape != w_gate.shape:
        raise ShapeError(f"feature kernel {w_feat.shape} vs gate kernel {w_gate.shape}")
    feat = conv2d(x, w_feat, b_feat, stride, dilation, pad)
    gate = conv2d(x, w_gate, b_gate, stride, dilation, pad)
    return mul(leaky_relu(feat, slope), sigmoid(gate))
