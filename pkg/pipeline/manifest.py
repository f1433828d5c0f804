"""
JSON-lines manifest: one record per produced sample
"""
from __future__ import annotations

import threading
from pathlib import Path
from typing import List, Optional

import pandas as pd
from pydantic import BaseModel, ValidationError

from dataset.io import PathLike
from models.exceptions import DatasetIOError, MissingArtifactError


class ManifestRecord(BaseModel):
    input_id: str
    image_index: int
    repetition: int
    seed: int
    output_image: str
    output_labels: str
    stages: List[str]
    constrained: bool = True
    target_count: int = 0
    placements: List[dict] = []
    shuffle: Optional[dict] = None
    smoothing_applied: bool = False
    checkpoint: Optional[str] = None

    @property
    def stem(self) -> str:
        return Path(self.output_image).stem


class ManifestWriter:
    """Serialized appender; callers hand records over in sample order"""

    def __init__(self, path: PathLike):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._fh = None

    def __enter__(self) -> "ManifestWriter":
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = self.path.open("w", encoding="utf-8")
        except OSError as e:
            raise DatasetIOError(f"cannot open manifest {self.path}: {e}") from e
        return self

    def append(self, record: ManifestRecord) -> None:
        with self._lock:
            self._fh.write(record.model_dump_json() + "\n")

    def __exit__(self, *exc) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_manifest(path: PathLike) -> List[ManifestRecord]:
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(f"manifest not found: {path}")
    records = []
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(ManifestRecord.model_validate_json(line))
        except ValidationError as e:
            raise DatasetIOError(f"{path}:{n}: malformed record: {e}") from e
    return records


def manifest_frame(records: List[ManifestRecord]) -> pd.DataFrame:
    """Per-sample summary table"""
    rows = [
        {
            "input_id": r.input_id,
            "repetition": r.repetition,
            "output_image": r.output_image,
            "placements": len(r.placements),
            "target_count": r.target_count,
            "shortfall": max(0, r.target_count - len(r.placements)),
            "shuffled_cells": len(r.shuffle["cells"]) if r.shuffle else 0,
            "smoothing_applied": r.smoothing_applied,
        }
        for r in records
    ]
    columns = ["input_id", "repetition", "output_image", "placements", "target_count", "shortfall", "shuffled_cells", "smoothing_applied"]
    return pd.DataFrame(rows, columns=columns)
