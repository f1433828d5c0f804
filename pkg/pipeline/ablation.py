"""
Stage variants run side by side on one dataset
"""
from __future__ import annotations

import logging
from typing import Dict, List, NamedTuple

import pandas as pd

from augment.compositor import CompositorConfig
from augment.ssd import RECOMMENDED_SSD, SsdConfig
from models.exceptions import MissingCheckpointError
from pipeline.config import PipelineConfig
from pipeline.manifest import manifest_frame
from pipeline.runner import run_augment

logger = logging.getLogger(__name__)


class Variant(NamedTuple):
    name: str
    stages: List[str]
    constrained: bool


VARIANTS = (
    Variant("copy_paste", ["paste"], False),
    Variant("paste_ssd", ["paste"], True),
    Variant("perturb", ["perturb"], True),
    Variant("ssd_smooth", ["paste", "smooth"], True),
    Variant("ssd_perturb_smooth", ["paste", "perturb", "smooth"], True),
)


def variant_config(base: PipelineConfig, variant: Variant) -> PipelineConfig:
    """Copy of `base` writing to output_dir/<variant name>"""
    compositor = base.compositor or CompositorConfig(ssd=SsdConfig(**RECOMMENDED_SSD))
    return PipelineConfig.model_validate({
        **base.model_dump(),
        "output_dir": base.output_dir / variant.name,
        "stages": variant.stages,
        "compositor": {**compositor.model_dump(), "constrained": variant.constrained},
    })


def run_ablation(base: PipelineConfig) -> pd.DataFrame:
    """One summary row per variant; smooth variants are skipped without a checkpoint"""
    rows: List[Dict] = []
    for variant in VARIANTS:
        cfg = variant_config(base, variant)
        try:
            frame = manifest_frame(run_augment(cfg))
        except MissingCheckpointError as e:
            logger.warning("variant %s skipped: %s", variant.name, e)
            rows.append({"variant": variant.name, "status": "skipped"})
            continue
        rows.append({
            "variant": variant.name,
            "status": "ok",
            "samples": len(frame),
            "placements": int(frame["placements"].sum()),
            "shortfall": int(frame["shortfall"].sum()),
            "shuffled_cells": int(frame["shuffled_cells"].sum()),
            "smoothed": int(frame["smoothing_applied"].sum()),
        })
    columns = ["variant", "status", "samples", "placements", "shortfall", "shuffled_cells", "smoothed"]
    return pd.DataFrame(rows, columns=columns)
