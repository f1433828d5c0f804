"""
Mix-based comparison augmentations: MixUp, CutOut, CutMix, CowOut, CowMix

Images only; labels are not mixed.
"""
from __future__ import annotations

from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator
from scipy import ndimage

from models.exceptions import OutOfBoundsError, ShapeError

Rect = Tuple[int, int, int, int]
Method = Literal["mixup", "cutout", "cutmix", "cowout", "cowmix"]


class MixConfig(BaseModel):
    method: Method = "cutmix"
    mix_weight: float = Field(0.5, ge=0.0, le=1.0)
    rect: Optional[Rect] = None
    cow_sigma: float = Field(8.0, gt=0.0)
    cow_p: float = Field(0.5, gt=0.0, lt=1.0)

    @field_validator("rect")
    @classmethod
    def _non_negative(cls, v: Optional[Rect]) -> Optional[Rect]:
        if v is not None and min(v) < 0:
            raise ValueError(f"rect entries must be >= 0, got {v}")
        return v


def _same_extents(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"images differ in extents: {a.shape} vs {b.shape}")


def _check_rect(shape: Tuple[int, ...], rect: Rect) -> None:
    x, y, w, h = rect
    if x < 0 or y < 0 or w < 0 or h < 0 or x + w > shape[1] or y + h > shape[0]:
        raise OutOfBoundsError(f"rect {rect} outside {shape[1]}×{shape[0]} image")


def mixup(a: np.ndarray, b: np.ndarray, mix_weight: float) -> np.ndarray:
    _same_extents(a, b)
    mixed = mix_weight * a.astype(np.float64) + (1.0 - mix_weight) * b.astype(np.float64)
    return np.floor(mixed + 0.5).astype(a.dtype)


def cutout(a: np.ndarray, rect: Rect) -> np.ndarray:
    _check_rect(a.shape, rect)
    x, y, w, h = rect
    out = a.copy()
    out[y:y + h, x:x + w] = 0
    return out


def cutmix(a: np.ndarray, b: np.ndarray, rect: Rect) -> np.ndarray:
    _same_extents(a, b)
    _check_rect(a.shape, rect)
    x, y, w, h = rect
    out = a.copy()
    out[y:y + h, x:x + w] = b[y:y + h, x:x + w]
    return out


def random_rect(height: int, width: int, mix_weight: float, rng: np.random.Generator) -> Rect:
    """Box covering about (1 - mix_weight) of the image at a uniform centre, clipped to bounds"""
    cut = np.sqrt(1.0 - mix_weight)
    w, h = int(width * cut), int(height * cut)
    cx, cy = int(rng.integers(width)), int(rng.integers(height))
    x0, y0 = np.clip(cx - w // 2, 0, width), np.clip(cy - h // 2, 0, height)
    x1, y1 = np.clip(cx + w // 2, 0, width), np.clip(cy + h // 2, 0, height)
    return int(x0), int(y0), int(x1 - x0), int(y1 - y0)


def cow_mask(extents: Tuple[int, int], cow_sigma: float, cow_p: float, rng: np.random.Generator) -> np.ndarray:
    """Gaussian-filtered white noise thresholded at its cow_p quantile; True on ~cow_p of pixels"""
    noise = ndimage.gaussian_filter(rng.normal(size=extents), sigma=cow_sigma, mode="reflect")
    threshold = np.quantile(noise, cow_p)
    return noise <= threshold


def cowout(a: np.ndarray, mask: np.ndarray) -> np.ndarray:
    if mask.shape != a.shape[:2]:
        raise ShapeError(f"mask {mask.shape} vs image {a.shape[:2]}")
    out = a.copy()
    out[mask] = 0
    return out


def cowmix(a: np.ndarray, b: np.ndarray, mask: np.ndarray) -> np.ndarray:
    _same_extents(a, b)
    if mask.shape != a.shape[:2]:
        raise ShapeError(f"mask {mask.shape} vs image {a.shape[:2]}")
    out = a.copy()
    out[mask] = b[mask]
    return out


def apply_baseline(a: np.ndarray, b: Optional[np.ndarray], cfg: MixConfig, rng: np.random.Generator) -> np.ndarray:
    """Dispatch used by the CLI `baseline` subcommand"""
    height, width = a.shape[:2]
    if cfg.method in ("mixup", "cutmix", "cowmix") and b is None:
        raise ShapeError(f"{cfg.method} needs a second image")
    if cfg.method == "mixup":
        return mixup(a, b, cfg.mix_weight)
    if cfg.method in ("cutout", "cutmix"):
        rect = cfg.rect if cfg.rect is not None else random_rect(height, width, cfg.mix_weight, rng)
        return cutout(a, rect) if cfg.method == "cutout" else cutmix(a, b, rect)
    mask = cow_mask((height, width), cfg.cow_sigma, cfg.cow_p, rng)
    return cowout(a, mask) if cfg.method == "cowout" else cowmix(a, b, mask)
