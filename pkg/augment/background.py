"""
Background perturbation: shuffle a fraction of nucleus-free cells within one image
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, Field

from models.exceptions import OutOfBoundsError
from models.types import LabeledImage


class PerturbConfig(BaseModel):
    alpha: float = Field(0.2, ge=0.0, le=1.0)
    patch_size: int = Field(20, ge=1)


@dataclass(frozen=True)
class ShufflePlan:
    """Chosen cells (row, col in the cell grid) and where each takes its content from.

    Cell `cells[i]` receives the content of `cells[permutation[i]]`.
    """

    patch_size: int
    cells: Tuple[Tuple[int, int], ...]
    permutation: Tuple[int, ...]
    eligible: int

    def to_record(self) -> dict:
        return {
            "patch_size": self.patch_size,
            "cells": [list(c) for c in self.cells],
            "permutation": list(self.permutation),
            "eligible": self.eligible,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ShufflePlan":
        return cls(
            patch_size=int(rec["patch_size"]),
            cells=tuple((int(r), int(c)) for r, c in rec["cells"]),
            permutation=tuple(int(i) for i in rec["permutation"]),
            eligible=int(rec.get("eligible", len(rec["cells"]))),
        )


def eligible_cells(labels: np.ndarray, patch_size: int) -> List[Tuple[int, int]]:
    """Whole cells (partial edge cells excluded) with zero foreground pixels, row-major"""
    rows, cols = labels.shape[0] // patch_size, labels.shape[1] // patch_size
    if rows == 0 or cols == 0:
        return []
    grid = labels[: rows * patch_size, : cols * patch_size] != 0
    occupied = grid.reshape(rows, patch_size, cols, patch_size).any(axis=(1, 3))
    return [(int(r), int(c)) for r, c in zip(*np.nonzero(~occupied))]


def shuffle_count(alpha: float, eligible: int) -> int:
    """⌈α × eligible⌉; products like 0.2 * 15 = 3.0000000000000004 snap down to 3"""
    exact = alpha * eligible
    whole = math.floor(exact)
    if whole > 0 and math.isclose(exact, whole, rel_tol=1e-12):
        return min(eligible, whole)
    return min(eligible, math.ceil(exact))


def plan_shuffle(img: LabeledImage, cfg: PerturbConfig, rng: np.random.Generator) -> ShufflePlan:
    cells = eligible_cells(img.labels, cfg.patch_size)
    count = shuffle_count(cfg.alpha, len(cells))
    if count == 0:
        return ShufflePlan(cfg.patch_size, (), (), len(cells))
    picked = np.sort(rng.choice(len(cells), size=count, replace=False))
    permutation = rng.permutation(count)
    return ShufflePlan(
        patch_size=cfg.patch_size,
        cells=tuple(cells[i] for i in picked.tolist()),
        permutation=tuple(int(i) for i in permutation.tolist()),
        eligible=len(cells),
    )


def apply_shuffle(img: LabeledImage, plan: ShufflePlan) -> LabeledImage:
    if len(plan.cells) <= 1:
        return img
    s = plan.patch_size
    for r, c in plan.cells:
        if (r + 1) * s > img.height or (c + 1) * s > img.width:
            raise OutOfBoundsError(f"cell ({r}, {c}) of size {s} leaves the image")
    contents = [img.pixels[r * s:(r + 1) * s, c * s:(c + 1) * s].copy() for r, c in plan.cells]
    pixels = img.pixels.copy()
    for (r, c), src in zip(plan.cells, plan.permutation):
        pixels[r * s:(r + 1) * s, c * s:(c + 1) * s] = contents[src]
    return img.replace(pixels=pixels)


def perturb_background(img: LabeledImage, cfg: PerturbConfig, rng: np.random.Generator) -> LabeledImage:
    """Permute ⌈α × #eligible⌉ uniformly chosen background cells; labels untouched"""
    return apply_shuffle(img, plan_shuffle(img, cfg, rng))


def shuffled_region(plan: ShufflePlan, height: int, width: int) -> np.ndarray:
    region = np.zeros((height, width), dtype=bool)
    s = plan.patch_size
    for r, c in plan.cells:
        region[r * s:(r + 1) * s, c * s:(c + 1) * s] = True
    return region
