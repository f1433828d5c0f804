"""
Instance bank: every training instance, indexed by area, sampled as paste templates
"""
from __future__ import annotations

import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator

from dataset.instances import extract_instances
from dataset.io import PathLike
from dataset.store import DatasetStore
from models.exceptions import DatasetIOError, EmptyBankError, NoCandidateError
from models.types import IDENTITY, Instance, LabeledImage, Transform

logger = logging.getLogger(__name__)


class TemplateFilter(BaseModel):
    area_min: float = Field(0, ge=0)
    area_max: float = float("inf")
    exclude_source: Optional[str] = None

    @model_validator(mode="after")
    def _ordered(self) -> "TemplateFilter":
        if self.area_min > self.area_max:
            raise ValueError(f"area_min {self.area_min} > area_max {self.area_max}")
        return self


@dataclass(frozen=True, eq=False)
class InstanceBank:
    """Immutable pool of templates; `area_index` orders entries by area"""

    entries: tuple
    area_index: tuple = field(init=False)
    _sorted_areas: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.entries:
            raise EmptyBankError("instance bank would be empty")
        areas = np.array([e.area for e in self.entries], dtype=np.int64)
        order = np.argsort(areas, kind="stable")
        sorted_areas = areas[order]
        sorted_areas.setflags(write=False)
        object.__setattr__(self, "area_index", tuple(int(i) for i in order))
        object.__setattr__(self, "_sorted_areas", sorted_areas)

    def __len__(self) -> int:
        return len(self.entries)

    def candidates(self, flt: TemplateFilter) -> List[int]:
        """Entry indices satisfying the filter, in area order"""
        lo = int(np.searchsorted(self._sorted_areas, flt.area_min, side="left"))
        hi = int(np.searchsorted(self._sorted_areas, flt.area_max, side="right"))
        picked = self.area_index[lo:hi]
        if flt.exclude_source is not None:
            picked = tuple(i for i in picked if self.entries[i].source_id != flt.exclude_source)
        return list(picked)

    def lookup(self, source_id: str, label: int) -> Instance:
        for entry in self.entries:
            if entry.source_id == source_id and entry.label == label:
                return entry
        raise KeyError(f"{source_id}:{label} not in bank")


def build_bank(dataset: Iterable[LabeledImage]) -> InstanceBank:
    """Collect every instance of every image"""
    entries: List[Instance] = []
    for img in dataset:
        entries.extend(extract_instances(img))
    if not entries:
        raise EmptyBankError("dataset contains no instances")
    logger.info("instance bank built: %d templates", len(entries))
    return InstanceBank(entries=tuple(entries))


def sample_template(bank: InstanceBank, flt: TemplateFilter, rng: np.random.Generator) -> Instance:
    """Uniform draw over the entries that pass the filter"""
    pool = bank.candidates(flt)
    if not pool:
        raise NoCandidateError(
            f"no template with area in [{flt.area_min}, {flt.area_max}]"
            + (f" outside {flt.exclude_source}" if flt.exclude_source else "")
        )
    return bank.entries[pool[int(rng.integers(len(pool)))]]


def random_transform(rng: np.random.Generator, enabled: bool = True) -> Transform:
    """Independent h/v flips (p=0.5 each) and a uniform quarter-turn count"""
    if not enabled:
        return IDENTITY
    flip_h = bool(rng.random() < 0.5)
    flip_v = bool(rng.random() < 0.5)
    k = int(rng.integers(4))
    return Transform(flip_h=flip_h, flip_v=flip_v, rot90_k=k)


def bank_summary(bank: InstanceBank) -> Dict:
    areas = pd.Series([e.area for e in bank.entries], dtype="int64")
    per_source = pd.Series([e.source_id for e in bank.entries]).value_counts().sort_index()
    return {
        "count": int(areas.size),
        "area_min": int(areas.min()),
        "area_max": int(areas.max()),
        "area_mean": float(areas.mean()),
        "area_median": float(areas.median()),
        "area_p10": float(areas.quantile(0.1)),
        "area_p90": float(areas.quantile(0.9)),
        "per_source": {str(k): int(v) for k, v in per_source.items()},
    }


def save_bank(bank: InstanceBank, path: PathLike) -> None:
    """JSON-lines cache, one entry per line"""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8") as fh:
            for entry in bank.entries:
                fh.write(json.dumps(entry.to_record(), sort_keys=True) + "\n")
    except OSError as e:
        raise DatasetIOError(f"cannot write bank cache {path}: {e}") from e


def load_bank(path: PathLike, data_dir: PathLike) -> InstanceBank:
    """Rebuild a cached bank; entries are re-extracted from `data_dir`"""
    path = Path(path)
    try:
        records = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    except (OSError, ValueError) as e:
        raise DatasetIOError(f"cannot read bank cache {path}: {e}") from e

    by_source: Dict[str, List[dict]] = defaultdict(list)
    for rec in records:
        by_source[rec["source_id"]].append(rec)

    store = DatasetStore(data_dir)
    entries: List[Instance] = []
    for source_id in by_source:
        found = {inst.label: inst for inst in extract_instances(store.load(source_id))}
        for rec in by_source[source_id]:
            inst = found.get(int(rec["label"]))
            if inst is None or inst.area != int(rec["area"]) or list(inst.bbox) != list(rec["bbox"]):
                raise DatasetIOError(f"bank cache entry {source_id}:{rec['label']} no longer matches its source image")
            entries.append(inst)
    if not entries:
        raise EmptyBankError(f"bank cache {path} is empty")
    return InstanceBank(entries=tuple(entries))
