"""
Foreground similarity encoder

Every template-region position takes a softmax-weighted mix of the centre
features of original-instance positions, weighted by the cosine similarity of
their 3×3 feature patches.
"""
from __future__ import annotations

import numpy as np

from autodiff.conv import unfold
from autodiff.tensor import ArrayLike, Tensor, as_tensor, concat, matmul, reshape, scatter, softmax, sqrt, take, transpose, tsum
from models.exceptions import NoOriginalRegionError, ShapeError

PATCH = 3
_NORM_EPS = 1e-12


def downsample_mask(mask: np.ndarray, factor: int) -> np.ndarray:
    """Area average over factor×factor blocks, kept where ≥ 0.5"""
    h, w = mask.shape
    if h % factor or w % factor:
        raise ShapeError(f"mask {h}×{w} is not divisible by {factor}")
    blocks = np.asarray(mask, dtype=np.float64).reshape(h // factor, factor, w // factor, factor)
    return blocks.mean(axis=(1, 3)) >= 0.5


def similarity_weights(feat: ArrayLike, template_idx: np.ndarray, original_idx: np.ndarray) -> Tensor:
    """Row-softmax of cosine similarities, shape (#template, #original), for one C×h×w map"""
    feat = as_tensor(feat)
    c, h, w = feat.shape
    patches = reshape(unfold(reshape(feat, (1, c, h, w)), PATCH, pad=PATCH // 2), (c * PATCH * PATCH, h * w))
    norms = sqrt(tsum(patches * patches, axis=0, keepdims=True) + _NORM_EPS)
    normed = patches / norms
    sim = matmul(transpose(take(normed, template_idx, axis=1)), take(normed, original_idx, axis=1))
    return softmax(sim, axis=1)


def _fse_single(feat: Tensor, mt: np.ndarray, mo: np.ndarray) -> Tensor:
    c, h, w = feat.shape
    template_idx = np.flatnonzero(mt.reshape(-1))
    if template_idx.size == 0:
        return feat
    original_idx = np.flatnonzero((mo & ~mt).reshape(-1))
    if original_idx.size == 0:
        raise NoOriginalRegionError(f"{template_idx.size} template positions but no original-instance position")
    weights = similarity_weights(feat, template_idx, original_idx)
    flat = reshape(feat, (c, h * w))
    filled = matmul(take(flat, original_idx, axis=1), transpose(weights))
    return reshape(scatter(flat, template_idx, filled, axis=1), (c, h, w))


def fse(feat: ArrayLike, mt_ds: np.ndarray, mo_ds: np.ndarray) -> Tensor:
    """feat is N×C×h×w; masks are N×h×w (or h×w for N = 1) at feature resolution"""
    feat = as_tensor(feat)
    if feat.ndim != 4:
        raise ShapeError(f"fse expects N×C×h×w, got {feat.shape}")
    n, c, h, w = feat.shape
    mt = np.asarray(mt_ds, dtype=bool).reshape(n, h, w)
    mo = np.asarray(mo_ds, dtype=bool).reshape(n, h, w)
    outputs = [
        reshape(_fse_single(reshape(take(feat, np.array([i]), axis=0), (c, h, w)), mt[i], mo[i]), (1, c, h, w))
        for i in range(n)
    ]
    return outputs[0] if n == 1 else concat(outputs, axis=0)
