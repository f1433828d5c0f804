"""
Scale / shape / distance admissibility of a template against an anchor instance
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import FrozenSet, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from models.exceptions import ConfigError, EmptyMaskError
from models.types import Instance, Point, mask_centroid

SCALE, SHAPE, DISTANCE = "scale", "shape", "distance"

# the thresholds are mandatory fields; these are the recommended starting values
RECOMMENDED_SSD = {"epsilon": 3.0, "rho": 0.5, "delta": 10.0, "gamma": 120.0}


class SsdConfig(BaseModel):
    epsilon: float = Field(..., ge=1.0)
    rho: float = Field(..., ge=0.0, le=2.0)
    delta: float = Field(..., ge=0.0)
    gamma: float = Field(..., gt=0.0)

    @model_validator(mode="after")
    def _bounds(self) -> "SsdConfig":
        if self.delta > self.gamma:
            raise ValueError(f"delta {self.delta} exceeds gamma {self.gamma}")
        return self

    def ensure_valid(self) -> None:
        """Re-check invariants (instances built with model_construct skip validation)"""
        problems = []
        if not self.epsilon >= 1.0:
            problems.append(f"epsilon {self.epsilon} < 1")
        if not 0.0 <= self.rho <= 2.0:
            problems.append(f"rho {self.rho} outside [0, 2]")
        if not 0.0 <= self.delta <= self.gamma:
            problems.append(f"need 0 <= delta <= gamma, got delta={self.delta} gamma={self.gamma}")
        if not self.gamma > 0.0:
            problems.append(f"gamma {self.gamma} must be positive")
        if problems:
            raise ConfigError("invalid SSD config: " + "; ".join(problems))


@dataclass(frozen=True)
class SsdReport:
    scale: float
    shape: float
    distance: float
    violated: FrozenSet[str]

    @property
    def passed(self) -> bool:
        return not self.violated

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "shape": self.shape,
            "distance": self.distance,
            "pass": self.passed,
            "violated": sorted(self.violated),
        }


def _area(mask: np.ndarray) -> int:
    area = int(np.count_nonzero(mask))
    if area == 0:
        raise EmptyMaskError("SSD constraint on an empty mask")
    return area


def _round_away(v: float) -> int:
    """Half away from zero, so round(-v) == -round(v)"""
    return int(math.copysign(math.floor(abs(v) + 0.5), v))


def f_scale(mo: np.ndarray, mt: np.ndarray) -> float:
    ao, at = _area(mo), _area(mt)
    return max(ao, at) / min(ao, at)


def f_shape(mo: np.ndarray, mt: np.ndarray) -> float:
    """Symmetric-difference size after integer centroid alignment, over the larger area"""
    ao, at = _area(mo), _area(mt)
    (cxo, cyo), (cxt, cyt) = mask_centroid(mo), mask_centroid(mt)
    dx, dy = _round_away(cxo - cxt), _round_away(cyo - cyt)

    ho, wo = mo.shape
    ht, wt = mt.shape
    y0, x0 = min(0, dy), min(0, dx)
    height = max(ho, ht + dy) - y0
    width = max(wo, wt + dx) - x0
    canvas_o = np.zeros((height, width), dtype=bool)
    canvas_t = np.zeros((height, width), dtype=bool)
    canvas_o[-y0:-y0 + ho, -x0:-x0 + wo] = mo
    canvas_t[dy - y0:dy - y0 + ht, dx - x0:dx - x0 + wt] = mt
    return int(np.count_nonzero(canvas_o ^ canvas_t)) / max(ao, at)


def f_dis(c_o: Point, c_t: Point) -> float:
    return math.hypot(c_o[0] - c_t[0], c_o[1] - c_t[1])


def check_ssd(anchor: Instance, template: Instance, target_centroid: Tuple[float, float], cfg: SsdConfig) -> SsdReport:
    """Scale, shape and distance bounds for one anchor and a template placed at target"""
    scale = f_scale(anchor.mask, template.mask)
    shape = f_shape(anchor.mask, template.mask)
    distance = f_dis(anchor.centroid, target_centroid)
    violated = set()
    if scale > cfg.epsilon:
        violated.add(SCALE)
    if shape > cfg.rho:
        violated.add(SHAPE)
    if not cfg.delta <= distance <= cfg.gamma:
        violated.add(DISTANCE)
    return SsdReport(scale=scale, shape=shape, distance=distance, violated=frozenset(violated))
