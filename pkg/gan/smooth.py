"""
Inference-time smoothing of pasted template regions
"""
from __future__ import annotations

import numpy as np

from gan.batch import to_unit, to_uint8
from gan.networks import DISCRIMINATOR_STRIDE, GanParams, generator_forward
from models.exceptions import ShapeError
from models.types import LabeledImage


def _pad_amount(extent: int) -> int:
    return (-extent) % DISCRIMINATOR_STRIDE


def _pad(array: np.ndarray, ph: int, pw: int) -> np.ndarray:
    widths = [(0, ph), (0, pw)] + [(0, 0)] * (array.ndim - 2)
    reflectable = ph < array.shape[0] and pw < array.shape[1]
    return np.pad(array, widths, mode="reflect" if reflectable else "symmetric")


def smooth(img: LabeledImage, template_mask: np.ndarray, params: GanParams) -> LabeledImage:
    """compose(u, G(u), M) in 8-bit; labels and every pixel outside M are untouched"""
    m = np.asarray(template_mask, dtype=bool)
    if m.shape != img.labels.shape:
        raise ShapeError(f"template mask {m.shape} vs image {img.labels.shape}")
    if not m.any():
        return img

    ph, pw = _pad_amount(img.height), _pad_amount(img.width)
    pixels = _pad(img.pixels, ph, pw)
    m_pad = np.pad(m, ((0, ph), (0, pw)))
    m_o = _pad(img.labels != 0, ph, pw) & ~m_pad

    generated = generator_forward(to_unit(pixels), m_pad, m_o, params).data
    rendered = to_uint8(generated)[: img.height, : img.width]
    return img.replace(pixels=np.where(m[..., None], rendered, img.pixels))
