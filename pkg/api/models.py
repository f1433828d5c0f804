"""
Pydantic models for API requests and responses
"""
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel

from augment.ssd import SsdConfig


class HealthCheck(BaseModel):
    status: str
    data_dir: str
    manifest_present: bool
    metrics_present: bool


class BankSummary(BaseModel):
    count: int
    area_min: int
    area_max: int
    area_mean: float
    area_median: float
    area_p10: float
    area_p90: float
    per_source: Dict[str, int]


class InstanceInfo(BaseModel):
    source_id: str
    label: int
    bbox: List[int]
    area: int
    centroid: List[float]


class InstanceRef(BaseModel):
    source_id: str
    label: int


class SsdCheckRequest(BaseModel):
    anchor: InstanceRef
    template: InstanceRef
    target: Tuple[float, float]
    transform: Optional[dict] = None
    ssd: SsdConfig


class SsdCheckResponse(BaseModel):
    scale: float
    shape: float
    distance: float
    passed: bool
    violated: List[str]


class ManifestSummary(BaseModel):
    samples: int
    inputs: int
    placements: int
    target_placements: int
    shortfall: int
    shuffled_cells: int
    smoothed: int
