"""
Mix-style comparison augmentations
"""
import numpy as np
import pytest
from pydantic import ValidationError

from augment.baselines import MixConfig, apply_baseline, cow_mask, cowmix, cowout, cutmix, cutout, mixup, random_rect
from models.exceptions import OutOfBoundsError, ShapeError


@pytest.fixture
def pair():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 256, size=(32, 48, 3), dtype=np.uint8)
    b = rng.integers(0, 256, size=(32, 48, 3), dtype=np.uint8)
    return a, b


def test_mixup_endpoints(pair):
    a, b = pair
    assert np.array_equal(mixup(a, b, 1.0), a)
    assert np.array_equal(mixup(a, b, 0.0), b)
    assert np.array_equal(mixup(a, a, 0.3), a)


def test_cutmix_and_cutout(pair):
    a, b = pair
    rect = (5, 4, 10, 7)
    assert np.array_equal(cutmix(a, a, rect), a)
    mixed = cutmix(a, b, rect)
    assert np.array_equal(mixed[4:11, 5:15], b[4:11, 5:15])
    cut = cutout(a, rect)
    assert not cut[4:11, 5:15].any()
    inside = np.zeros(a.shape[:2], dtype=bool)
    inside[4:11, 5:15] = True
    assert np.array_equal(cut[~inside], a[~inside])
    assert np.array_equal(mixed[~inside], a[~inside])


def test_rect_and_extent_errors(pair):
    a, b = pair
    with pytest.raises(OutOfBoundsError):
        cutout(a, (40, 0, 10, 5))
    with pytest.raises(ShapeError):
        cutmix(a, b[:16], (0, 0, 4, 4))
    with pytest.raises(ShapeError):
        mixup(a, b[:, :10], 0.5)


def test_random_rect_in_bounds():
    rng = np.random.default_rng(1)
    for _ in range(200):
        x, y, w, h = random_rect(32, 48, float(rng.uniform()), rng)
        assert 0 <= x and 0 <= y and x + w <= 48 and y + h <= 32


def test_cow_mask_coverage():
    for seed in range(50):
        mask = cow_mask((128, 128), cow_sigma=8.0, cow_p=0.3, rng=np.random.default_rng(seed))
        assert abs(mask.mean() - 0.3) <= 0.02


def test_cowout_and_cowmix(pair):
    a, b = pair
    mask = cow_mask(a.shape[:2], 4.0, 0.5, np.random.default_rng(2))
    out = cowout(a, mask)
    assert not out[mask].any()
    assert np.array_equal(out[~mask], a[~mask])
    mixed = cowmix(a, b, mask)
    assert np.array_equal(mixed[mask], b[mask])
    assert np.array_equal(mixed[~mask], a[~mask])
    with pytest.raises(ShapeError):
        cowout(a, mask[:4])


def test_apply_baseline_dispatch(pair):
    a, b = pair
    rng = np.random.default_rng(3)
    assert np.array_equal(apply_baseline(a, b, MixConfig(method="mixup", mix_weight=1.0), rng), a)
    assert np.array_equal(apply_baseline(a, None, MixConfig(method="cutout", rect=(0, 0, 0, 0)), rng), a)
    with pytest.raises(ShapeError):
        apply_baseline(a, None, MixConfig(method="cutmix"), rng)


def test_config_validation():
    with pytest.raises(ValidationError):
        MixConfig(rect=(-1, 0, 4, 4))
    with pytest.raises(ValidationError):
        MixConfig(cow_p=1.0)
    with pytest.raises(ValidationError):
        MixConfig(method="mosaic")
