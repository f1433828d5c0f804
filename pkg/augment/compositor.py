"""
Copy-paste compositor: proposes SSD-admissible placements and stamps them
into the image and label map
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from augment.bank import InstanceBank, TemplateFilter, random_transform, sample_template
from augment.ssd import SsdConfig, check_ssd, f_dis
from dataset.instances import extract_instances
from models.exceptions import ConfigError, NoAnchorError, NoCandidateError, OutOfBoundsError
from models.types import Instance, LabeledImage, Transform

logger = logging.getLogger(__name__)

MAX_LABEL = 0xFFFF


class CompositorConfig(BaseModel):
    paste_ratio: float = Field(0.5, ge=0.0)
    max_attempts: int = Field(50, ge=1)
    occlusion_cap: float = Field(0.3, ge=0.0, lt=1.0)
    ssd: SsdConfig
    constrained: bool = True
    template_transforms: bool = True
    cross_image_only: bool = False

    def ensure_valid(self) -> None:
        self.ssd.ensure_valid()
        if self.max_attempts < 1:
            raise ConfigError(f"max_attempts must be >= 1, got {self.max_attempts}")
        if not 0.0 <= self.occlusion_cap < 1.0:
            raise ConfigError(f"occlusion_cap must be in [0, 1), got {self.occlusion_cap}")
        if self.paste_ratio < 0:
            raise ConfigError(f"paste_ratio must be >= 0, got {self.paste_ratio}")


def round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


@dataclass(frozen=True, eq=False)
class Placement:
    template: Instance
    transform: Transform
    target_centroid: Tuple[int, int]
    anchor_label: int
    new_label: int

    @property
    def placed(self) -> Instance:
        return self.template.transformed(self.transform)

    @property
    def origin(self) -> Tuple[int, int]:
        """Top-left corner of the transformed footprint"""
        return footprint_origin(self.placed, self.target_centroid)

    def footprint(self, height: int, width: int) -> np.ndarray:
        placed = self.placed
        x0, y0 = footprint_origin(placed, self.target_centroid)
        h, w = placed.mask.shape
        if x0 < 0 or y0 < 0 or x0 + w > width or y0 + h > height:
            raise OutOfBoundsError(
                f"placement of {placed.source_id}:{placed.label} at {self.target_centroid} leaves the {width}×{height} image"
            )
        full = np.zeros((height, width), dtype=bool)
        full[y0:y0 + h, x0:x0 + w] = placed.mask
        return full

    def to_record(self) -> dict:
        return {
            "template_source": self.template.source_id,
            "template_label": int(self.template.label),
            "transform": self.transform.to_dict(),
            "target": [int(self.target_centroid[0]), int(self.target_centroid[1])],
            "anchor": int(self.anchor_label),
            "new_label": int(self.new_label),
        }


@dataclass(frozen=True, eq=False)
class PlacementPlan:
    placements: Tuple[Placement, ...]
    template_mask: np.ndarray
    target_count: int = 0

    @property
    def shortfall(self) -> int:
        return max(0, self.target_count - len(self.placements))

    @property
    def new_labels(self) -> List[int]:
        return [p.new_label for p in self.placements]

    def to_records(self) -> List[dict]:
        return [p.to_record() for p in self.placements]

    @classmethod
    def empty(cls, height: int, width: int) -> "PlacementPlan":
        return cls(placements=(), template_mask=np.zeros((height, width), dtype=bool))

    @classmethod
    def from_records(
        cls,
        records: Sequence[dict],
        template_lookup: Callable[[str, int], Instance],
        height: int,
        width: int,
        target_count: int = 0,
    ) -> "PlacementPlan":
        """Rebuild a plan from its manifest records; templates come from `template_lookup`"""
        placements = []
        mask = np.zeros((height, width), dtype=bool)
        for rec in records:
            p = Placement(
                template=template_lookup(rec["template_source"], int(rec["template_label"])),
                transform=Transform.from_dict(rec["transform"]),
                target_centroid=(int(rec["target"][0]), int(rec["target"][1])),
                anchor_label=int(rec["anchor"]),
                new_label=int(rec["new_label"]),
            )
            mask |= p.footprint(height, width)
            placements.append(p)
        return cls(placements=tuple(placements), template_mask=mask, target_count=target_count)


def footprint_origin(placed: Instance, target: Tuple[int, int]) -> Tuple[int, int]:
    lx, ly = placed.local_centroid
    return target[0] - round_half_up(lx), target[1] - round_half_up(ly)


class _Canvas:
    """Working label map plus visible-area bookkeeping for the occlusion cap"""

    def __init__(self, img: LabeledImage, originals: Sequence[Instance], cap: float):
        self.labels = img.labels.astype(np.int64)
        self.full: Dict[int, int] = {o.label: o.area for o in originals}
        self.visible: Dict[int, int] = dict(self.full)
        self.cap = cap

    def fits(self, placed: Instance, origin: Tuple[int, int]) -> bool:
        x0, y0 = origin
        h, w = placed.mask.shape
        height, width = self.labels.shape
        if x0 < 0 or y0 < 0 or x0 + w > width or y0 + h > height:
            return False
        covered = self.labels[y0:y0 + h, x0:x0 + w][placed.mask]
        ids, counts = np.unique(covered[covered != 0], return_counts=True)
        for label, count in zip(ids.tolist(), counts.tolist()):
            if self.visible[label] - count < (1.0 - self.cap) * self.full[label] - 1e-9:
                return False
        return True

    def stamp(self, placed: Instance, origin: Tuple[int, int], new_label: int) -> None:
        x0, y0 = origin
        h, w = placed.mask.shape
        view = self.labels[y0:y0 + h, x0:x0 + w]
        covered = view[placed.mask]
        ids, counts = np.unique(covered[covered != 0], return_counts=True)
        for label, count in zip(ids.tolist(), counts.tolist()):
            self.visible[label] -= count
        view[placed.mask] = new_label
        self.full[new_label] = self.visible[new_label] = placed.area


def _template_filter(anchor: Instance, cfg: CompositorConfig, image_id: str) -> TemplateFilter:
    exclude = image_id if cfg.cross_image_only else None
    if not cfg.constrained:
        return TemplateFilter(exclude_source=exclude)
    eps = cfg.ssd.epsilon
    return TemplateFilter(area_min=anchor.area / eps, area_max=anchor.area * eps, exclude_source=exclude)


def _constrained_attempt(
    anchor: Instance, template: Instance, canvas: _Canvas, cfg: CompositorConfig, rng: np.random.Generator
) -> Optional[Tuple[Instance, Tuple[int, int], Tuple[int, int]]]:
    placed = template.transformed(random_transform(rng, cfg.template_transforms))
    theta = rng.uniform(0.0, 2.0 * math.pi)
    radius = rng.uniform(cfg.ssd.delta, cfg.ssd.gamma)
    target = (
        round_half_up(anchor.centroid[0] + radius * math.cos(theta)),
        round_half_up(anchor.centroid[1] + radius * math.sin(theta)),
    )
    report = check_ssd(anchor, placed, target, cfg.ssd)
    if not report.passed:
        logger.debug("rejected %s:%s near %s: %s", placed.source_id, placed.label, anchor.label, sorted(report.violated))
        return None
    origin = footprint_origin(placed, target)
    if not canvas.fits(placed, origin):
        return None
    return placed, target, origin


def _unconstrained_attempt(
    template: Instance, canvas: _Canvas, cfg: CompositorConfig, rng: np.random.Generator
) -> Optional[Tuple[Instance, Tuple[int, int], Tuple[int, int]]]:
    placed = template.transformed(random_transform(rng, cfg.template_transforms))
    height, width = canvas.labels.shape
    h, w = placed.mask.shape
    if h > height or w > width:
        return None
    x0 = int(rng.integers(0, width - w + 1))
    y0 = int(rng.integers(0, height - h + 1))
    lx, ly = placed.local_centroid
    target = (x0 + round_half_up(lx), y0 + round_half_up(ly))
    origin = footprint_origin(placed, target)
    if not canvas.fits(placed, origin):
        return None
    return placed, target, origin


def _nearest(originals: Sequence[Instance], point: Tuple[int, int]) -> Instance:
    return min(originals, key=lambda o: (f_dis(o.centroid, point), o.label))


def propose_placements(
    img: LabeledImage, bank: InstanceBank, cfg: CompositorConfig, rng: np.random.Generator
) -> PlacementPlan:
    """Sample up to round(β × #instances) placements; attempts that exhaust max_attempts are dropped"""
    cfg.ensure_valid()
    originals = extract_instances(img)
    if not originals:
        raise NoAnchorError(f"{img.id} has no instance to anchor placements on")

    target_count = round_half_up(cfg.paste_ratio * len(originals))
    canvas = _Canvas(img, originals, cfg.occlusion_cap)
    next_label = int(img.labels.max()) + 1
    template_mask = np.zeros(img.labels.shape, dtype=bool)
    placements: List[Placement] = []

    for _ in range(target_count):
        if next_label > MAX_LABEL:
            logger.warning("%s: label ids exhausted after %d placements", img.id, len(placements))
            break
        accepted = None
        for _attempt in range(cfg.max_attempts):
            anchor = originals[int(rng.integers(len(originals)))]
            try:
                template = sample_template(bank, _template_filter(anchor, cfg, img.id), rng)
            except NoCandidateError:
                continue
            if cfg.constrained:
                accepted = _constrained_attempt(anchor, template, canvas, cfg, rng)
            else:
                accepted = _unconstrained_attempt(template, canvas, cfg, rng)
                if accepted is not None:
                    anchor = _nearest(originals, accepted[1])
            if accepted is not None:
                break
        if accepted is None:
            continue
        placed, target, origin = accepted
        canvas.stamp(placed, origin, next_label)
        h, w = placed.mask.shape
        template_mask[origin[1]:origin[1] + h, origin[0]:origin[0] + w] |= placed.mask
        placements.append(
            Placement(
                template=template,
                transform=placed.transform,
                target_centroid=target,
                anchor_label=anchor.label,
                new_label=next_label,
            )
        )
        next_label += 1

    if len(placements) < target_count:
        logger.warning("%s: placed %d of %d templates (constraints too tight?)", img.id, len(placements), target_count)
    return PlacementPlan(placements=tuple(placements), template_mask=template_mask, target_count=target_count)


def apply_plan(img: LabeledImage, plan: PlacementPlan) -> LabeledImage:
    """Stamp placements in order; later pastes occlude earlier ones"""
    if plan.template_mask.shape != img.labels.shape:
        raise OutOfBoundsError(f"plan is for {plan.template_mask.shape}, image is {img.labels.shape}")
    if not plan.placements:
        return img
    pixels = img.pixels.copy()
    labels = img.labels.copy()
    for p in plan.placements:
        placed = p.placed
        x0, y0 = footprint_origin(placed, p.target_centroid)
        h, w = placed.mask.shape
        if x0 < 0 or y0 < 0 or x0 + w > img.width or y0 + h > img.height:
            raise OutOfBoundsError(f"placement {p.new_label} at {p.target_centroid} leaves the image")
        pixels[y0:y0 + h, x0:x0 + w][placed.mask] = placed.pixels[placed.mask]
        labels[y0:y0 + h, x0:x0 + w][placed.mask] = p.new_label
    return img.replace(pixels=pixels, labels=labels)
