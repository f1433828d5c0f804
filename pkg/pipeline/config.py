"""
Pipeline configuration document
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from augment.background import PerturbConfig
from augment.compositor import CompositorConfig
from dataset.io import PathLike
from gan.config import GanConfig
from models.exceptions import DatasetIOError
from pipeline.settings import INSMIX_MANIFEST, seed_override

logger = logging.getLogger(__name__)

Stage = Literal["paste", "perturb", "smooth"]
CONFIG_SNAPSHOT = "config.json"


class PipelineConfig(BaseModel):
    input_dir: Path
    output_dir: Path
    seed: int = Field(0, ge=0, lt=2 ** 64)
    repetitions: int = Field(4, ge=1)
    stages: List[Stage] = Field(default_factory=lambda: ["paste", "perturb"])
    compositor: Optional[CompositorConfig] = None
    perturb: PerturbConfig = Field(default_factory=PerturbConfig)
    gan: GanConfig = Field(default_factory=GanConfig)
    gan_checkpoint: Optional[Path] = None
    bank_cache: Optional[Path] = None
    workers: int = Field(1, ge=1)
    manifest_name: str = INSMIX_MANIFEST

    @model_validator(mode="after")
    def _stages(self) -> "PipelineConfig":
        if not self.stages:
            raise ValueError("stages must not be empty")
        if len(set(self.stages)) != len(self.stages):
            raise ValueError(f"stages repeat: {self.stages}")
        if "paste" in self.stages and self.compositor is None:
            raise ValueError("the paste stage needs a compositor section with SSD thresholds")
        return self

    @property
    def manifest_path(self) -> Path:
        return self.output_dir / self.manifest_name


def load_config(path: PathLike, apply_env: bool = True) -> PipelineConfig:
    """Parse a JSON config; INSMIX_SEED replaces the seed when set"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DatasetIOError(f"cannot read config {path}: {e}") from e
    cfg = PipelineConfig.model_validate_json(text)
    override = seed_override() if apply_env else None
    if override is not None:
        logger.info("seed %d overridden by INSMIX_SEED=%d", cfg.seed, override)
        cfg = PipelineConfig.model_validate({**cfg.model_dump(), "seed": override})
    return cfg
