"""
Composition and the triplet / adversarial / reconstruction objectives
"""
from __future__ import annotations

from typing import Mapping, NamedTuple

import numpy as np

from autodiff.tensor import ArrayLike, Tensor, as_tensor, mean, relu, tabs, where
from gan.networks import discriminator_apply
from models.exceptions import ShapeError


class GeneratorLoss(NamedTuple):
    total: Tensor
    adv: Tensor
    recon: Tensor


def compose(u: ArrayLike, g: ArrayLike, m: np.ndarray) -> Tensor:
    """S(u): g inside the template mask, u everywhere else (exact select)"""
    u, g = as_tensor(u), as_tensor(g)
    if u.shape != g.shape:
        raise ShapeError(f"compose extents differ: {u.shape} vs {g.shape}")
    m = np.asarray(m, dtype=bool)
    if m.ndim == u.ndim - 1:
        m = m[:, None] if u.ndim == 4 else m
    try:
        m = np.broadcast_to(m, u.shape)
    except ValueError as e:
        raise ShapeError(f"mask {m.shape} does not cover image {u.shape}") from e
    return where(m, g, u)


def patch_distance(a: Tensor, b: Tensor) -> Tensor:
    """Mean absolute difference between two patch maps"""
    if a.shape != b.shape:
        raise ShapeError(f"patch maps differ: {a.shape} vs {b.shape}")
    return mean(tabs(a - b))


def triplet_hinge(d_pos: ArrayLike, d_neg: ArrayLike, margin: float) -> Tensor:
    return relu(as_tensor(d_pos) - d_neg + margin)


def loss_D(x_a: ArrayLike, x_p: ArrayLike, s_u: ArrayLike, weights: Mapping[str, Tensor], margin: float = 1.0) -> Tensor:
    """max(0, d(D(x_a), D(x_p)) − d(D(x_a), D(S(u))) + m)"""
    da = discriminator_apply(x_a, weights)
    dp = discriminator_apply(x_p, weights)
    ds = discriminator_apply(s_u, weights)
    return triplet_hinge(patch_distance(da, dp), patch_distance(da, ds), margin)


def combine_generator_loss(adv: ArrayLike, recon: ArrayLike, lam: float) -> Tensor:
    return as_tensor(adv) + as_tensor(recon) * lam


def loss_G(
    x_a: ArrayLike,
    x_p: ArrayLike,
    u: ArrayLike,
    g: Tensor,
    m: np.ndarray,
    weights: Mapping[str, Tensor],
    lam: float = 10.0,
) -> GeneratorLoss:
    """adv = d(D(x_a), D(S(u))) − d(D(x_a), D(x_p)); total = adv + λ·mean|u − G(u)|.

    `weights` should be constants so only the generator receives gradient.
    """
    u = as_tensor(u)
    da = discriminator_apply(x_a, weights)
    dp = discriminator_apply(x_p, weights)
    ds = discriminator_apply(compose(u, g, m), weights)
    adv = patch_distance(da, ds) - patch_distance(da, dp)
    recon = mean(tabs(u - g))
    return GeneratorLoss(combine_generator_loss(adv, recon, lam), adv, recon)
