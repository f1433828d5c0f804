"""
Immutable domain records shared across the augmentation stages
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from models.exceptions import DimensionMismatchError, EmptyMaskError, UnsupportedFormatError

BBox = Tuple[int, int, int, int]
Point = Tuple[float, float]


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class LabeledImage:
    """RGB raster plus its instance label map (0 = background)"""

    pixels: np.ndarray
    labels: np.ndarray
    id: str = ""

    def __post_init__(self) -> None:
        pixels = np.asarray(self.pixels)
        labels = np.asarray(self.labels)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise UnsupportedFormatError(f"pixels must be H×W×3, got {pixels.shape}")
        if pixels.dtype != np.uint8:
            raise UnsupportedFormatError(f"pixels must be 8-bit, got {pixels.dtype}")
        if labels.ndim != 2:
            raise UnsupportedFormatError(f"labels must be H×W, got {labels.shape}")
        if labels.dtype != np.uint16:
            raise UnsupportedFormatError(f"labels must be 16-bit, got {labels.dtype}")
        if pixels.shape[:2] != labels.shape:
            raise DimensionMismatchError(
                f"image {pixels.shape[1]}×{pixels.shape[0]} vs label map {labels.shape[1]}×{labels.shape[0]}"
            )
        object.__setattr__(self, "pixels", _frozen(pixels, np.uint8))
        object.__setattr__(self, "labels", _frozen(labels, np.uint16))

    @property
    def height(self) -> int:
        return int(self.labels.shape[0])

    @property
    def width(self) -> int:
        return int(self.labels.shape[1])

    @property
    def foreground(self) -> np.ndarray:
        return self.labels != 0

    def replace(self, *, pixels: np.ndarray | None = None, labels: np.ndarray | None = None) -> "LabeledImage":
        return LabeledImage(
            pixels=self.pixels if pixels is None else pixels,
            labels=self.labels if labels is None else labels,
            id=self.id,
        )

    def crop(self, x: int, y: int, w: int, h: int) -> "LabeledImage":
        return LabeledImage(self.pixels[y:y + h, x:x + w], self.labels[y:y + h, x:x + w], id=self.id)

    def equals(self, other: "LabeledImage") -> bool:
        return np.array_equal(self.pixels, other.pixels) and np.array_equal(self.labels, other.labels)


@dataclass(frozen=True)
class Transform:
    """Flip/rotation applied to a template before it is checked and pasted"""

    flip_h: bool = False
    flip_v: bool = False
    rot90_k: int = 0

    def apply(self, array: np.ndarray) -> np.ndarray:
        out = array
        if self.flip_h:
            out = out[:, ::-1]
        if self.flip_v:
            out = out[::-1, :]
        if self.rot90_k % 4:
            out = np.rot90(out, k=self.rot90_k % 4, axes=(0, 1))
        return np.ascontiguousarray(out)

    def to_dict(self) -> dict:
        return {"flip_h": self.flip_h, "flip_v": self.flip_v, "rot90_k": self.rot90_k % 4}

    @classmethod
    def from_dict(cls, data: dict) -> "Transform":
        return cls(bool(data.get("flip_h", False)), bool(data.get("flip_v", False)), int(data.get("rot90_k", 0)))


IDENTITY = Transform()


def mask_centroid(mask: np.ndarray) -> Point:
    """Arithmetic mean of (x, y) over true cells"""
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        raise EmptyMaskError("mask has no pixels")
    return float(xs.mean()), float(ys.mean())


@dataclass(frozen=True, eq=False)
class Instance:
    """One nucleus cut from its source image"""

    mask: np.ndarray
    bbox: BBox
    centroid: Point
    area: int
    pixels: np.ndarray
    source_id: str
    label: int
    transform: Transform = field(default=IDENTITY)

    def __post_init__(self) -> None:
        object.__setattr__(self, "mask", _frozen(self.mask, bool))
        object.__setattr__(self, "pixels", _frozen(self.pixels, np.uint8))

    @property
    def local_centroid(self) -> Point:
        return self.centroid[0] - self.bbox[0], self.centroid[1] - self.bbox[1]

    @property
    def key(self) -> Tuple[str, int]:
        return self.source_id, self.label

    def transformed(self, transform: Transform) -> "Instance":
        """Template copy with the flips/rotation applied in its own bbox frame"""
        if transform == IDENTITY:
            return self
        mask = transform.apply(self.mask)
        pixels = transform.apply(self.pixels)
        lx, ly = mask_centroid(mask)
        x, y = self.bbox[0], self.bbox[1]
        return Instance(
            mask=mask,
            bbox=(x, y, int(mask.shape[1]), int(mask.shape[0])),
            centroid=(x + lx, y + ly),
            area=self.area,
            pixels=pixels,
            source_id=self.source_id,
            label=self.label,
            transform=transform,
        )

    def to_record(self) -> dict:
        return {
            "source_id": self.source_id,
            "label": int(self.label),
            "bbox": [int(v) for v in self.bbox],
            "area": int(self.area),
            "centroid": [float(self.centroid[0]), float(self.centroid[1])],
        }
