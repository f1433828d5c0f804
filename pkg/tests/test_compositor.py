"""
Placement proposals, occlusion cap and stamping
"""
import numpy as np
import pytest

from augment.compositor import CompositorConfig, PlacementPlan, apply_plan, propose_placements, round_half_up
from augment.ssd import check_ssd, f_dis
from dataset.instances import extract_instances
from models.exceptions import ConfigError, NoAnchorError
from models.types import LabeledImage


def _plans(images, bank, cfg, seed=0):
    rng = np.random.default_rng(seed)
    return [(img, propose_placements(img, bank, cfg, rng)) for img in images]


def test_placements_pass_ssd_and_stay_in_bounds(synthetic_images, bank, compositor_config):
    total = 0
    for img, plan in _plans(synthetic_images, bank, compositor_config):
        anchors = {o.label: o for o in extract_instances(img)}
        first = int(img.labels.max()) + 1
        assert plan.new_labels == list(range(first, first + len(plan.placements)))
        assert len(plan.placements) <= plan.target_count
        for p in plan.placements:
            report = check_ssd(anchors[p.anchor_label], p.placed, p.target_centroid, compositor_config.ssd)
            assert report.passed, report.to_dict()
            assert p.footprint(img.height, img.width).sum() == p.template.area
        total += len(plan.placements)
    assert total > 0


def test_apply_plan_stamps_labels_and_pixels(synthetic_images, bank, compositor_config):
    for img, plan in _plans(synthetic_images, bank, compositor_config, seed=1):
        out = apply_plan(img, plan)
        untouched = ~plan.template_mask
        assert np.array_equal(out.pixels[untouched], img.pixels[untouched])
        assert np.array_equal(out.labels[untouched], img.labels[untouched])
        if plan.placements:
            last = plan.placements[-1]
            footprint = last.footprint(img.height, img.width)
            assert np.all(out.labels[footprint] == last.new_label)
            assert np.array_equal(out.pixels[footprint], last.placed.pixels[last.placed.mask])


def test_occlusion_cap(synthetic_images, bank, compositor_config):
    cfg = compositor_config.model_copy(update={"paste_ratio": 3.0})
    for img, plan in _plans(synthetic_images, bank, cfg, seed=2):
        out = apply_plan(img, plan)
        for original in extract_instances(img):
            visible = int(np.count_nonzero(out.labels == original.label))
            assert visible >= (1.0 - cfg.occlusion_cap) * original.area - 1e-9


def test_target_count_rounds_half_up(synthetic_images, bank, compositor_config):
    assert [round_half_up(v) for v in (0.4, 0.5, 1.2, 1.5, 2.5)] == [0, 1, 1, 2, 3]
    cfg = compositor_config.model_copy(update={"paste_ratio": 0.4})
    for img in synthetic_images:
        plan = propose_placements(img, bank, cfg, np.random.default_rng(0))
        assert plan.target_count == round_half_up(0.4 * len(extract_instances(img)))


def test_zero_ratio_is_identity(synthetic_images, bank, compositor_config):
    cfg = compositor_config.model_copy(update={"paste_ratio": 0.0})
    img = synthetic_images[0]
    plan = propose_placements(img, bank, cfg, np.random.default_rng(0))
    assert plan.placements == () and plan.target_count == 0
    assert apply_plan(img, plan).equals(img)


def test_no_anchor(bank, compositor_config):
    blank = LabeledImage(np.zeros((32, 32, 3), dtype=np.uint8), np.zeros((32, 32), dtype=np.uint16), id="blank")
    with pytest.raises(NoAnchorError):
        propose_placements(blank, bank, compositor_config, np.random.default_rng(0))


def test_plan_rebuilt_from_records(synthetic_images, bank, compositor_config):
    for img, plan in _plans(synthetic_images, bank, compositor_config, seed=3):
        rebuilt = PlacementPlan.from_records(plan.to_records(), bank.lookup, img.height, img.width, plan.target_count)
        assert np.array_equal(rebuilt.template_mask, plan.template_mask)
        assert apply_plan(img, rebuilt).equals(apply_plan(img, plan))


def test_same_seed_same_plan(synthetic_images, bank, compositor_config):
    a = _plans(synthetic_images, bank, compositor_config, seed=9)
    b = _plans(synthetic_images, bank, compositor_config, seed=9)
    assert [p.to_records() for _, p in a] == [p.to_records() for _, p in b]


def test_unconstrained_anchor_is_nearest(synthetic_images, bank, compositor_config):
    cfg = compositor_config.model_copy(update={"constrained": False})
    for img, plan in _plans(synthetic_images, bank, cfg, seed=4):
        originals = extract_instances(img)
        for p in plan.placements:
            p.footprint(img.height, img.width)
            nearest = min(f_dis(o.centroid, p.target_centroid) for o in originals)
            anchor = next(o for o in originals if o.label == p.anchor_label)
            assert f_dis(anchor.centroid, p.target_centroid) == nearest


def test_cross_image_only(synthetic_images, bank, compositor_config):
    cfg = compositor_config.model_copy(update={"cross_image_only": True})
    for img, plan in _plans(synthetic_images, bank, cfg, seed=5):
        assert all(p.template.source_id != img.id for p in plan.placements)


def test_invalid_config_is_rejected(synthetic_images, bank, ssd_config):
    bad = CompositorConfig.model_construct(paste_ratio=0.5, max_attempts=0, occlusion_cap=0.3, ssd=ssd_config,
                                           constrained=True, template_transforms=True, cross_image_only=False)
    with pytest.raises(ConfigError):
        propose_placements(synthetic_images[0], bank, bad, np.random.default_rng(0))
