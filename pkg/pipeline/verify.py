"""
Independent audit of an augmentation run against its manifest
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np
import pandas as pd

from augment.background import ShufflePlan, shuffled_region
from augment.compositor import Placement
from augment.ssd import DISTANCE, SCALE, SHAPE, SsdConfig
from dataset.instances import extract_instances
from dataset.io import PathLike, load_labeled_image
from dataset.store import DatasetStore
from gan.networks import GanParams
from models.exceptions import DatasetIOError, EmptyMaskError, MissingArtifactError, OutOfBoundsError
from models.types import Instance, Transform
from pipeline.config import PipelineConfig
from pipeline.manifest import ManifestRecord, read_manifest
from pipeline.replay import replay_record, template_lookup

logger = logging.getLogger(__name__)

ANCHOR, BOUNDS, OUTSIDE, FOREGROUND, LABELS, REPLAY, TEMPLATE = (
    "anchor", "bounds", "outside_mask", "foreground", "labels", "replay", "template",
)
_DISTANCE_SLACK = 1e-9


@dataclass(frozen=True)
class Violation:
    sample: str
    kind: str
    detail: str


@dataclass
class VerifyReport:
    records: int = 0
    placements: int = 0
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def count(self, kind: str) -> int:
        return sum(1 for v in self.violations if v.kind == kind)

    def by_kind(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for v in self.violations:
            out[v.kind] = out.get(v.kind, 0) + 1
        return out

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([vars(v) for v in self.violations], columns=["sample", "kind", "detail"])


def _index(instances: List[Instance]) -> Dict[int, Instance]:
    return {inst.label: inst for inst in instances}


@dataclass(frozen=True)
class PixelSsd:
    scale: float
    shape: float
    distance: float
    violated: FrozenSet[str]

    def to_dict(self) -> dict:
        return {"scale": self.scale, "shape": self.shape, "distance": self.distance, "violated": sorted(self.violated)}


def _pixel_set(mask: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        raise EmptyMaskError("SSD audit on an empty mask")
    return xs, ys


def _half_away(v: float) -> int:
    return int(np.sign(v) * np.floor(abs(v) + 0.5))


def pixel_ssd(anchor: Instance, placed: Instance, target: Tuple[float, float], cfg: SsdConfig) -> PixelSsd:
    """Scale, shape and distance recomputed from (x, y) coordinate sets; the distance band has 1e-9 slack"""
    xo, yo = _pixel_set(anchor.mask)
    xt, yt = _pixel_set(placed.mask)
    scale = max(xo.size, xt.size) / min(xo.size, xt.size)

    dx, dy = _half_away(xo.mean() - xt.mean()), _half_away(yo.mean() - yt.mean())
    original = set(zip(xo.tolist(), yo.tolist()))
    moved = {(x + dx, y + dy) for x, y in zip(xt.tolist(), yt.tolist())}
    shape = len(original ^ moved) / max(len(original), len(moved))

    bx, by = anchor.bbox[0], anchor.bbox[1]
    distance = math.hypot(bx + xo.mean() - target[0], by + yo.mean() - target[1])

    violated = set()
    if scale > cfg.epsilon:
        violated.add(SCALE)
    if shape > cfg.rho:
        violated.add(SHAPE)
    if not cfg.delta - _DISTANCE_SLACK <= distance <= cfg.gamma + _DISTANCE_SLACK:
        violated.add(DISTANCE)
    return PixelSsd(scale, shape, distance, frozenset(violated))


def verify_record(
    cfg: PipelineConfig,
    record: ManifestRecord,
    report: VerifyReport,
    lookup,
    replay: bool = False,
    params: Optional[GanParams] = None,
) -> None:
    store = DatasetStore(cfg.input_dir)
    name = record.output_image
    try:
        original = store.load(record.input_id)
        output = load_labeled_image(
            cfg.output_dir / record.output_image, cfg.output_dir / record.output_labels, image_id=record.input_id
        )
    except DatasetIOError as e:
        raise MissingArtifactError(f"{name}: {e}") from e

    def flag(kind: str, detail: str) -> None:
        report.violations.append(Violation(name, kind, detail))

    anchors = _index(extract_instances(original))
    height, width = original.height, original.width
    template_region = np.zeros((height, width), dtype=bool)
    expected_labels = original.labels.astype(np.int64)

    for n, rec in enumerate(record.placements):
        report.placements += 1
        try:
            template = lookup(rec["template_source"], int(rec["template_label"]))
        except MissingArtifactError as e:
            flag(TEMPLATE, str(e))
            continue
        placement = Placement(
            template=template,
            transform=Transform.from_dict(rec["transform"]),
            target_centroid=(int(rec["target"][0]), int(rec["target"][1])),
            anchor_label=int(rec["anchor"]),
            new_label=int(rec["new_label"]),
        )
        anchor = anchors.get(placement.anchor_label)
        if anchor is None:
            flag(ANCHOR, f"placement {n}: anchor {placement.anchor_label} not in {record.input_id}")
        elif record.constrained and cfg.compositor is not None:
            ssd = pixel_ssd(anchor, placement.placed, placement.target_centroid, cfg.compositor.ssd)
            for kind in sorted(ssd.violated):
                flag(kind, f"placement {n}: {ssd.to_dict()}")
        try:
            footprint = placement.footprint(height, width)
        except OutOfBoundsError as e:
            flag(BOUNDS, f"placement {n}: {e}")
            continue
        template_region |= footprint
        expected_labels[footprint] = placement.new_label

    changed = template_region.copy()
    if record.shuffle is not None:
        changed |= shuffled_region(ShufflePlan.from_record(record.shuffle), height, width)

    outside = ~changed
    diff = np.any(output.pixels != original.pixels, axis=2)
    if np.any(diff & outside):
        flag(OUTSIDE, f"{int(np.count_nonzero(diff & outside))} pixels changed outside template and shuffled cells")
    visible = original.foreground & ~template_region
    if np.any(diff & visible):
        flag(FOREGROUND, f"{int(np.count_nonzero(diff & visible))} original foreground pixels changed")
    if not np.array_equal(expected_labels, output.labels.astype(np.int64)):
        flag(LABELS, f"{int(np.count_nonzero(expected_labels != output.labels))} label pixels disagree with placements")

    if replay:
        rebuilt = replay_record(cfg, record, params=params, lookup=lookup)
        if not rebuilt.equals(output):
            flag(REPLAY, "replayed sample differs from written output")


def run_verify(
    cfg: PipelineConfig,
    manifest: Optional[PathLike] = None,
    replay: bool = False,
    params: Optional[GanParams] = None,
) -> VerifyReport:
    """Re-check every record: SSD, bounds, immutability outside M, labels, optional byte replay"""
    records = read_manifest(manifest if manifest is not None else cfg.manifest_path)
    lookup = template_lookup(DatasetStore(cfg.input_dir))
    report = VerifyReport(records=len(records))
    for record in records:
        verify_record(cfg, record, report, lookup, replay=replay, params=params)
    if report.ok:
        logger.info("verify: %d records, %d placements, no violations", report.records, report.placements)
    else:
        logger.warning("verify: %d violations %s", len(report.violations), report.by_kind())
    return report
