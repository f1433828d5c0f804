"""
Generator and patch discriminator

Generator (width c, input RGB ⊕ M):
    e1 gated k5      4  -> c
    e2 gated k3 s2   c  -> 2c
    e3 gated k3 s2   2c -> 4c
    b1 gated k3 d2   4c -> 4c
    b2 gated k3 d4   4c -> 4c      -> FSE, concatenated with b2
    d1 up2 + gated   8c -> 2c
    d2 up2 + gated   2c -> c
    d3 gated         c  -> c
    to_rgb 1×1 conv + sigmoid

Discriminator: four spectral-normalized k4 s2 p1 convolutions 3 -> c -> 2c -> 4c -> 1,
leaky activations between them, one score per 16×16 input cell.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Mapping, NamedTuple, Optional

import numpy as np

from autodiff.checkpoint import load_tensors, save_tensors
from autodiff.conv import LEAKY_SLOPE, conv2d, gated_conv
from autodiff.spectral import SpectralState, spectral_normalize, warm_up
from autodiff.tensor import ArrayLike, Tensor, as_tensor, concat, leaky_relu, no_grad, sigmoid, upsample_nearest
from dataset.io import PathLike
from gan.fse import downsample_mask, fse
from models.exceptions import CheckpointFormatError, MissingCheckpointError, ShapeError

logger = logging.getLogger(__name__)

GENERATOR_STRIDE = 4
DISCRIMINATOR_STRIDE = 16


class GatedLayer(NamedTuple):
    name: str
    in_mult: int
    out_mult: int
    k: int
    stride: int = 1
    dilation: int = 1
    pad: int = 1
    upsample: bool = False


# channel multiples of base width c; in_mult 0 means the 4-channel image input
GENERATOR_LAYERS = (
    GatedLayer("e1", 0, 1, 5, pad=2),
    GatedLayer("e2", 1, 2, 3, stride=2),
    GatedLayer("e3", 2, 4, 3, stride=2),
    GatedLayer("b1", 4, 4, 3, dilation=2, pad=2),
    GatedLayer("b2", 4, 4, 3, dilation=4, pad=4),
    GatedLayer("d1", 8, 2, 3, upsample=True),
    GatedLayer("d2", 2, 1, 3, upsample=True),
    GatedLayer("d3", 1, 1, 3),
)
DISCRIMINATOR_LAYERS = ("d1", "d2", "d3", "d4")
IMAGE_CHANNELS = 3


@dataclass
class GanParams:
    """Raw (pre-normalization) weights of both networks plus spectral states"""

    generator: Dict[str, np.ndarray]
    discriminator: Dict[str, np.ndarray]
    spectral: Dict[str, SpectralState] = field(default_factory=dict)

    @property
    def base_channels(self) -> int:
        return int(self.generator["e1.w_feat"].shape[0])

    def copy(self) -> "GanParams":
        return GanParams(
            generator={k: v.copy() for k, v in self.generator.items()},
            discriminator={k: v.copy() for k, v in self.discriminator.items()},
            spectral={k: SpectralState(s.u.copy(), s.iterations_per_step) for k, s in self.spectral.items()},
        )

    def all_finite(self) -> bool:
        arrays = list(self.generator.values()) + list(self.discriminator.values())
        return all(np.all(np.isfinite(a)) for a in arrays)

    def to_tensors(self) -> Dict[str, np.ndarray]:
        out = {f"generator/{k}": v for k, v in self.generator.items()}
        out.update({f"discriminator/{k}": v for k, v in self.discriminator.items()})
        out.update({f"spectral/{k}.u": s.u for k, s in self.spectral.items()})
        return out

    @classmethod
    def from_tensors(cls, tensors: Mapping[str, np.ndarray], iterations_per_step: int = 1) -> "GanParams":
        generator, discriminator, spectral = {}, {}, {}
        for name, array in tensors.items():
            group, _, key = name.partition("/")
            if group == "generator":
                generator[key] = np.array(array)
            elif group == "discriminator":
                discriminator[key] = np.array(array)
            elif group == "spectral" and key.endswith(".u"):
                spectral[key[:-2]] = SpectralState(np.array(array), iterations_per_step)
            else:
                raise CheckpointFormatError(f"unexpected tensor {name!r} in checkpoint")
        params = cls(generator, discriminator, spectral)
        _check_complete(params)
        return params


def _gated_names(name: str):
    return f"{name}.w_feat", f"{name}.w_gate", f"{name}.b_feat", f"{name}.b_gate"


def _check_complete(params: GanParams) -> None:
    expected = [n for layer in GENERATOR_LAYERS for n in _gated_names(layer.name)] + ["to_rgb.w", "to_rgb.b"]
    missing = [n for n in expected if n not in params.generator]
    missing += [f"{d}.{p}" for d in DISCRIMINATOR_LAYERS for p in ("w", "b") if f"{d}.{p}" not in params.discriminator]
    missing += [f"spectral/{d}" for d in DISCRIMINATOR_LAYERS if d not in params.spectral]
    if missing:
        raise CheckpointFormatError(f"checkpoint lacks {', '.join(missing)}")
    c = params.base_channels
    for layer in GENERATOR_LAYERS:
        in_c = 4 if layer.in_mult == 0 else layer.in_mult * c
        want = (layer.out_mult * c, in_c, layer.k, layer.k)
        if params.generator[f"{layer.name}.w_feat"].shape != want:
            raise CheckpointFormatError(f"{layer.name} weight shape {params.generator[f'{layer.name}.w_feat'].shape}, expected {want}")


def _kernel(rng: np.random.Generator, out_c: int, in_c: int, k: int) -> np.ndarray:
    """Zero-mean Gaussian with std 1/sqrt(fan_in)"""
    return rng.normal(0.0, 1.0 / np.sqrt(in_c * k * k), size=(out_c, in_c, k, k))


def discriminator_channels(c: int):
    return [IMAGE_CHANNELS, c, 2 * c, 4 * c, 1]


def init_params(base_channels: int, rng: np.random.Generator, spectral_iterations: int = 1) -> GanParams:
    c = base_channels
    generator: Dict[str, np.ndarray] = {}
    for layer in GENERATOR_LAYERS:
        in_c = 4 if layer.in_mult == 0 else layer.in_mult * c
        out_c = layer.out_mult * c
        w_feat, w_gate, b_feat, b_gate = _gated_names(layer.name)
        generator[w_feat] = _kernel(rng, out_c, in_c, layer.k)
        generator[w_gate] = _kernel(rng, out_c, in_c, layer.k)
        generator[b_feat] = np.zeros(out_c)
        generator[b_gate] = np.zeros(out_c)
    generator["to_rgb.w"] = _kernel(rng, IMAGE_CHANNELS, c, 1)
    generator["to_rgb.b"] = np.zeros(IMAGE_CHANNELS)

    discriminator: Dict[str, np.ndarray] = {}
    spectral: Dict[str, SpectralState] = {}
    chans = discriminator_channels(c)
    for name, in_c, out_c in zip(DISCRIMINATOR_LAYERS, chans[:-1], chans[1:]):
        discriminator[f"{name}.w"] = _kernel(rng, out_c, in_c, 4)
        discriminator[f"{name}.b"] = np.zeros(out_c)
        spectral[name] = SpectralState.init(out_c, rng, spectral_iterations)
        warm_up(discriminator[f"{name}.w"], spectral[name])
    logger.debug("initialized GAN parameters with base width %d", c)
    return GanParams(generator, discriminator, spectral)


def generator_leaves(params: GanParams, requires_grad: bool) -> Dict[str, Tensor]:
    return {k: Tensor(v, requires_grad=requires_grad) for k, v in params.generator.items()}


def discriminator_leaves(params: GanParams, requires_grad: bool) -> Dict[str, Tensor]:
    return {k: Tensor(v, requires_grad=requires_grad) for k, v in params.discriminator.items()}


def spectral_weights(leaves: Mapping[str, Tensor], spectral: Mapping[str, SpectralState], update: bool) -> Dict[str, Tensor]:
    """Effective discriminator weights: every kernel divided by its σ̂"""
    out = dict(leaves)
    for name in DISCRIMINATOR_LAYERS:
        out[f"{name}.w"] = spectral_normalize(leaves[f"{name}.w"], spectral[name], update=update)
    return out


def _as_mask4(mask: np.ndarray, n: int, h: int, w: int) -> np.ndarray:
    m = np.asarray(mask).astype(bool)
    if m.ndim == 2:
        m = m[None, None]
    elif m.ndim == 3:
        m = m[:, None]
    if m.shape != (n, 1, h, w):
        raise ShapeError(f"mask shape {np.asarray(mask).shape} does not match image {n}×{h}×{w}")
    return m


def generator_apply(u: ArrayLike, m: np.ndarray, m_o: np.ndarray, weights: Mapping[str, Tensor]) -> Tensor:
    """G(u) for an NCHW batch u in [0, 1]; m and m_o are template and original-instance masks"""
    u = as_tensor(u)
    if u.ndim != 4 or u.shape[1] != IMAGE_CHANNELS:
        raise ShapeError(f"generator expects N×3×H×W, got {u.shape}")
    n, _, h, w = u.shape
    if h % GENERATOR_STRIDE or w % GENERATOR_STRIDE:
        raise ShapeError(f"generator input {h}×{w} is not divisible by {GENERATOR_STRIDE}")
    m4 = _as_mask4(m, n, h, w)
    mo4 = _as_mask4(m_o, n, h, w) & ~m4

    x = concat([u, m4.astype(np.float64)], axis=1)
    fused = None
    for layer in GENERATOR_LAYERS:
        if layer.upsample:
            x = upsample_nearest(x, 2)
        w_feat, w_gate, b_feat, b_gate = (weights[k] for k in _gated_names(layer.name))
        x = gated_conv(x, w_feat, w_gate, b_feat, b_gate, stride=layer.stride, dilation=layer.dilation, pad=layer.pad)
        if layer.name == "b2":
            mt_ds = np.stack([downsample_mask(m4[i, 0], GENERATOR_STRIDE) for i in range(n)])
            mo_ds = np.stack([downsample_mask(mo4[i, 0], GENERATOR_STRIDE) for i in range(n)])
            fused = fse(x, mt_ds, mo_ds)
            x = concat([x, fused], axis=1)
    return sigmoid(conv2d(x, weights["to_rgb.w"], weights["to_rgb.b"]))


def generator_forward(u: ArrayLike, m: np.ndarray, m_o: np.ndarray, params: GanParams) -> Tensor:
    with no_grad():
        return generator_apply(u, m, m_o, generator_leaves(params, requires_grad=False))


def discriminator_apply(x: ArrayLike, weights: Mapping[str, Tensor]) -> Tensor:
    """Patch map (N, 1, H/16, W/16) from effective weights"""
    x = as_tensor(x)
    if x.ndim != 4 or x.shape[1] != IMAGE_CHANNELS:
        raise ShapeError(f"discriminator expects N×3×H×W, got {x.shape}")
    if x.shape[2] % DISCRIMINATOR_STRIDE or x.shape[3] % DISCRIMINATOR_STRIDE:
        raise ShapeError(f"discriminator input {x.shape[2]}×{x.shape[3]} is not divisible by {DISCRIMINATOR_STRIDE}")
    for i, name in enumerate(DISCRIMINATOR_LAYERS):
        x = conv2d(x, weights[f"{name}.w"], weights[f"{name}.b"], stride=2, pad=1)
        if i < len(DISCRIMINATOR_LAYERS) - 1:
            x = leaky_relu(x, LEAKY_SLOPE)
    return x


def discriminator_forward(x: ArrayLike, params: GanParams) -> Tensor:
    """Inference pass; spectral states are read, not advanced"""
    with no_grad():
        weights = spectral_weights(discriminator_leaves(params, False), params.spectral, update=False)
        return discriminator_apply(x, weights)


def save_params(params: GanParams, path: PathLike) -> None:
    save_tensors(path, params.to_tensors())


def load_params(path: Optional[PathLike], iterations_per_step: int = 1) -> GanParams:
    if path is None or not Path(path).is_file():
        raise MissingCheckpointError(f"generator checkpoint not found: {path}")
    return GanParams.from_tensors(load_tensors(path), iterations_per_step)
