"""
Rebuild a sample from its input image and manifest record
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, Optional

from augment.background import ShufflePlan, apply_shuffle
from augment.compositor import PlacementPlan, apply_plan
from dataset.instances import find_instance
from dataset.store import DatasetStore
from gan.networks import GanParams, load_params
from gan.smooth import smooth
from models.exceptions import DatasetIOError, MissingArtifactError
from models.types import Instance, LabeledImage
from pipeline.config import PipelineConfig
from pipeline.manifest import ManifestRecord

TemplateLookup = Callable[[str, int], Instance]


def template_lookup(store: DatasetStore) -> TemplateLookup:
    """(source_id, label) -> Instance, re-extracted from the input directory"""

    @lru_cache(maxsize=None)
    def load(source_id: str):
        return store.load(source_id)

    def lookup(source_id: str, label: int) -> Instance:
        try:
            return find_instance(load(source_id), label)
        except (KeyError, DatasetIOError) as e:
            raise MissingArtifactError(f"template {source_id}:{label} unavailable: {e}") from e

    return lookup


def placement_plan(record: ManifestRecord, lookup: TemplateLookup, height: int, width: int) -> PlacementPlan:
    return PlacementPlan.from_records(record.placements, lookup, height, width, record.target_count)


def replay_record(
    cfg: PipelineConfig,
    record: ManifestRecord,
    params: Optional[GanParams] = None,
    lookup: Optional[TemplateLookup] = None,
) -> LabeledImage:
    store = DatasetStore(cfg.input_dir)
    lookup = lookup or template_lookup(store)
    try:
        current = store.load(record.input_id)
    except DatasetIOError as e:
        raise MissingArtifactError(f"input {record.input_id} unavailable: {e}") from e

    plan = PlacementPlan.empty(current.height, current.width)
    for stage in record.stages:
        if stage == "paste":
            plan = placement_plan(record, lookup, current.height, current.width)
            current = apply_plan(current, plan)
        elif stage == "perturb" and record.shuffle is not None:
            current = apply_shuffle(current, ShufflePlan.from_record(record.shuffle))
        elif stage == "smooth" and record.smoothing_applied:
            if params is None:
                params = load_params(record.checkpoint or cfg.gan_checkpoint, cfg.gan.spectral_iterations)
            current = smooth(current, plan.template_mask, params)
    return current
