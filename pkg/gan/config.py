"""
Smooth-GAN hyper-parameters
"""
from __future__ import annotations

from typing import Tuple

from pydantic import BaseModel, Field, field_validator


class GanConfig(BaseModel):
    margin: float = Field(1.0, gt=0.0)
    lam: float = Field(10.0, ge=0.0)
    base_channels: int = Field(16, ge=1)
    crop: int = Field(64, ge=16)
    steps: int = Field(2000, ge=0)
    lr_g: float = Field(1e-4, gt=0.0)
    lr_d: float = Field(1e-4, gt=0.0)
    betas: Tuple[float, float] = (0.5, 0.9)
    spectral_iterations: int = Field(1, ge=1)
    seed: int = 0
    log_every: int = Field(100, ge=1)
    max_batch_tries: int = Field(200, ge=1)

    @field_validator("crop")
    @classmethod
    def _crop_multiple_of_four(cls, v: int) -> int:
        if v % 4:
            raise ValueError(f"crop must be a multiple of 4, got {v}")
        return v

    @field_validator("betas")
    @classmethod
    def _betas_in_unit_interval(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        if not all(0.0 <= b < 1.0 for b in v):
            raise ValueError(f"betas must lie in [0, 1), got {v}")
        return v
