"""
Synthetic two-palette ellipse nuclei

Each image draws one of two stain palettes, a smoothed noisy background and a
set of non-overlapping filled ellipses labelled 1..k. Used by the toy GAN run,
the test suite and `scripts/generate_data.py`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import ndimage

from models.types import LabeledImage

RGB = Tuple[int, int, int]


@dataclass(frozen=True)
class Palette:
    background: RGB
    nucleus: RGB


# hematoxylin-ish purple on pink, and a paler blue-grey stain
PALETTES: Tuple[Palette, Palette] = (
    Palette(background=(232, 182, 205), nucleus=(92, 48, 128)),
    Palette(background=(214, 206, 226), nucleus=(70, 82, 150)),
)


def _ellipse_mask(height: int, width: int, cx: float, cy: float, a: float, b: float, theta: float) -> np.ndarray:
    yy, xx = np.mgrid[0:height, 0:width]
    dx, dy = xx - cx, yy - cy
    c, s = np.cos(theta), np.sin(theta)
    u = (dx * c + dy * s) / a
    v = (-dx * s + dy * c) / b
    return u * u + v * v <= 1.0


def synthetic_image(
    rng: np.random.Generator,
    size: Tuple[int, int] = (64, 64),
    n_nuclei: Tuple[int, int] = (4, 9),
    radius: Tuple[float, float] = (3.0, 7.0),
    palette: Palette | None = None,
    image_id: str = "synthetic",
) -> LabeledImage:
    height, width = size
    palette = palette or PALETTES[int(rng.integers(len(PALETTES)))]

    texture = ndimage.gaussian_filter(rng.normal(0.0, 1.0, (height, width)), sigma=2.0)
    texture /= max(float(np.abs(texture).max()), 1e-12)
    image = np.empty((height, width, 3), dtype=np.float64)
    image[:] = palette.background
    image += texture[..., None] * 18.0

    labels = np.zeros((height, width), dtype=np.uint16)
    target = int(rng.integers(n_nuclei[0], n_nuclei[1] + 1))
    label = 0
    for _ in range(target * 20):
        if label == target:
            break
        a, b = rng.uniform(radius[0], radius[1], size=2)
        margin = int(np.ceil(max(a, b))) + 1
        if width <= 2 * margin or height <= 2 * margin:
            break
        cx = rng.uniform(margin, width - margin)
        cy = rng.uniform(margin, height - margin)
        mask = _ellipse_mask(height, width, cx, cy, a, b, rng.uniform(0.0, np.pi))
        if not mask.any() or labels[ndimage.binary_dilation(mask)].any():
            continue
        label += 1
        labels[mask] = label
        shade = rng.normal(0.0, 10.0, size=(int(mask.sum()), 3))
        image[mask] = np.asarray(palette.nucleus, dtype=np.float64) + shade

    pixels = np.clip(np.floor(image + 0.5), 0, 255).astype(np.uint8)
    return LabeledImage(pixels=pixels, labels=labels, id=image_id)


def generate_synthetic_dataset(
    n_images: int,
    size: Tuple[int, int] = (64, 64),
    seed: int = 0,
    palettes: Sequence[Palette] = PALETTES,
    n_nuclei: Tuple[int, int] = (4, 9),
    radius: Tuple[float, float] = (3.0, 7.0),
) -> List[LabeledImage]:
    """Deterministic list of synthetic images, ids `syn_000`, `syn_001`, ..."""
    rng = np.random.default_rng(seed)
    images = []
    for i in range(n_images):
        palette = palettes[i % len(palettes)]
        images.append(
            synthetic_image(rng, size=size, n_nuclei=n_nuclei, radius=radius, palette=palette, image_id=f"syn_{i:03d}")
        )
    return images
