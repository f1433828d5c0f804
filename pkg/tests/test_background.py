"""
Background perturbation: foreground immutability and cell-content preservation
"""
import math

import numpy as np
import pytest

from augment.background import (
    PerturbConfig,
    ShufflePlan,
    apply_shuffle,
    eligible_cells,
    perturb_background,
    plan_shuffle,
    shuffle_count,
    shuffled_region,
)
from dataset.synthetic import generate_synthetic_dataset
from models.exceptions import OutOfBoundsError
from models.types import LabeledImage


def _cells(img, plan):
    s = plan.patch_size
    return sorted(img.pixels[r * s:(r + 1) * s, c * s:(c + 1) * s].tobytes() for r, c in plan.cells)


@pytest.fixture(scope="module")
def hundred_images():
    return generate_synthetic_dataset(100, size=(64, 64), seed=21)


def test_foreground_and_cell_contents_preserved(hundred_images):
    cfg = PerturbConfig(alpha=0.2, patch_size=8)
    rng = np.random.default_rng(0)
    for img in hundred_images:
        plan = plan_shuffle(img, cfg, rng)
        out = apply_shuffle(img, plan)
        fg = img.foreground
        assert np.array_equal(out.pixels[fg], img.pixels[fg])
        assert np.array_equal(out.labels, img.labels)
        assert _cells(out, plan) == _cells(img, plan)
        outside = ~shuffled_region(plan, img.height, img.width)
        assert np.array_equal(out.pixels[outside], img.pixels[outside])


def test_alpha_zero_is_identity(hundred_images):
    cfg = PerturbConfig(alpha=0.0, patch_size=8)
    rng = np.random.default_rng(1)
    for img in hundred_images[:20]:
        assert perturb_background(img, cfg, rng).equals(img)


def test_cell_count_is_ceiling(hundred_images):
    cfg = PerturbConfig(alpha=0.2, patch_size=8)
    rng = np.random.default_rng(2)
    for img in hundred_images[:20]:
        plan = plan_shuffle(img, cfg, rng)
        assert plan.eligible == len(eligible_cells(img.labels, 8))
        assert len(plan.cells) == math.ceil(0.2 * plan.eligible - 1e-9)
        assert sorted(plan.permutation) == list(range(len(plan.cells)))


def test_shuffle_count_edges():
    assert shuffle_count(0.2, 15) == 3
    assert shuffle_count(0.21, 10) == 3
    assert shuffle_count(1e-10, 1) == 1
    assert shuffle_count(0.0, 10) == 0
    assert shuffle_count(1.0, 7) == 7
    assert shuffle_count(0.5, 0) == 0

    img = LabeledImage(np.zeros((20, 20, 3), dtype=np.uint8), np.zeros((20, 20), dtype=np.uint16))
    plan = plan_shuffle(img, PerturbConfig(alpha=1e-10, patch_size=20), np.random.default_rng(0))
    assert plan.cells == ((0, 0),) and plan.permutation == (0,)


def test_full_histogram_invariant_when_all_cells_eligible():
    rng = np.random.default_rng(3)
    pixels = rng.integers(0, 256, size=(40, 40, 3), dtype=np.uint8)
    img = LabeledImage(pixels, np.zeros((40, 40), dtype=np.uint16))
    out = perturb_background(img, PerturbConfig(alpha=1.0, patch_size=10), rng)
    assert np.array_equal(np.sort(out.pixels.reshape(-1, 3), axis=0), np.sort(pixels.reshape(-1, 3), axis=0))


def test_partial_edge_cells_excluded():
    labels = np.zeros((45, 45), dtype=np.uint16)
    assert eligible_cells(labels, 20) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    labels[5, 25] = 1
    assert eligible_cells(labels, 20) == [(0, 0), (1, 0), (1, 1)]
    assert eligible_cells(labels, 50) == []


def test_recorded_plan_replays(hundred_images):
    img = hundred_images[0]
    plan = plan_shuffle(img, PerturbConfig(alpha=0.5, patch_size=8), np.random.default_rng(4))
    again = ShufflePlan.from_record(plan.to_record())
    assert apply_shuffle(img, again).equals(apply_shuffle(img, plan))


def test_cell_outside_image():
    img = LabeledImage(np.zeros((16, 16, 3), dtype=np.uint8), np.zeros((16, 16), dtype=np.uint16))
    plan = ShufflePlan(patch_size=8, cells=((0, 0), (2, 0)), permutation=(1, 0), eligible=2)
    with pytest.raises(OutOfBoundsError):
        apply_shuffle(img, plan)
