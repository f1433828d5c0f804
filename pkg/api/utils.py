"""
API Utilities - workspace access and error mapping
"""
from __future__ import annotations

import threading
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from fastapi import HTTPException

from augment.bank import InstanceBank, build_bank
from dataset.store import DatasetStore
from gan.train import moving_average, read_metrics
from models.exceptions import (
    ConfigError,
    DatasetIOError,
    EmptyBankError,
    EmptyMaskError,
    MissingArtifactError,
    OutOfBoundsError,
    ShapeError,
)
from pipeline import settings
from pipeline.manifest import ManifestRecord, read_manifest


class Workspace:
    """Dataset directory, augmentation output and training metrics served by the API"""

    def __init__(
        self,
        data_dir: Optional[Path] = None,
        output_dir: Optional[Path] = None,
        manifest_name: Optional[str] = None,
        metrics_csv: Optional[Path] = None,
    ):
        self.data_dir = Path(data_dir or settings.INSMIX_DATA_DIR)
        self.output_dir = Path(output_dir or settings.INSMIX_OUTPUT_DIR)
        self.manifest_path = self.output_dir / (manifest_name or settings.INSMIX_MANIFEST)
        self.metrics_path = Path(metrics_csv or settings.INSMIX_METRICS_CSV)
        self._bank: Optional[InstanceBank] = None
        self._lock = threading.Lock()

    @property
    def store(self) -> DatasetStore:
        return DatasetStore(self.data_dir)

    def bank(self) -> InstanceBank:
        """Built once from the dataset directory on first use"""
        with self._lock:
            if self._bank is None:
                self._bank = build_bank(self.store.load_all())
            return self._bank

    def records(self) -> List[ManifestRecord]:
        return read_manifest(self.manifest_path)

    def metrics(self, window: int = 100) -> pd.DataFrame:
        if not self.metrics_path.is_file():
            raise MissingArtifactError(f"training metrics not found: {self.metrics_path}")
        df = read_metrics(self.metrics_path)
        for column in ("loss_d", "loss_adv", "recon"):
            df[f"{column}_ma"] = moving_average(df, column, window)
        return df


def frame_to_rows(df: pd.DataFrame) -> List[Dict[str, Any]]:
    """DataFrame rows as JSON-safe dictionaries"""
    clean = df.replace({np.nan: None})
    return clean.to_dict(orient="records")


def to_http(error: Exception) -> HTTPException:
    if isinstance(error, (MissingArtifactError, DatasetIOError, EmptyBankError, KeyError)):
        return HTTPException(status_code=404, detail=str(error))
    if isinstance(error, (ConfigError, ShapeError, EmptyMaskError, OutOfBoundsError)):
        return HTTPException(status_code=422, detail=str(error))
    return HTTPException(status_code=500, detail=str(error))
