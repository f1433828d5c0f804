"""
Dataset directory manager
Pairs `<stem>.png` with `<stem>_label.png` and loads/saves them
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, NamedTuple, Optional

from dataset.io import PathLike, load_labeled_image, save_labeled_image
from models.exceptions import DatasetIOError, InsMixError
from models.types import LabeledImage

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".tif", ".tiff")
LABEL_SUFFIX = "_label"


class SamplePair(NamedTuple):
    stem: str
    image_path: Path
    label_path: Path


class DatasetStore:
    """Manages one directory of image / label-map pairs"""

    def __init__(self, root: PathLike):
        self.root = Path(root)

    def image_path(self, stem: str) -> Path:
        return self.root / f"{stem}.png"

    def label_path(self, stem: str) -> Path:
        return self.root / f"{stem}{LABEL_SUFFIX}.png"

    def pairs(self) -> List[SamplePair]:
        """All complete pairs, sorted by stem"""
        if not self.root.is_dir():
            raise DatasetIOError(f"dataset directory not found: {self.root}")
        found = []
        for path in sorted(self.root.iterdir()):
            if path.suffix.lower() not in IMAGE_SUFFIXES or path.stem.endswith(LABEL_SUFFIX):
                continue
            label = self._label_for(path.stem)
            if label is None:
                logger.warning("skipping %s: no %s%s file", path.name, path.stem, LABEL_SUFFIX)
                continue
            found.append(SamplePair(path.stem, path, label))
        return found

    def _label_for(self, stem: str) -> Optional[Path]:
        for suffix in IMAGE_SUFFIXES:
            candidate = self.root / f"{stem}{LABEL_SUFFIX}{suffix}"
            if candidate.is_file():
                return candidate
        return None

    def load(self, stem: str) -> LabeledImage:
        for pair in self.pairs():
            if pair.stem == stem:
                return load_labeled_image(pair.image_path, pair.label_path, image_id=stem)
        raise DatasetIOError(f"no pair named {stem!r} in {self.root}")

    def load_all(self) -> List[LabeledImage]:
        return [load_labeled_image(p.image_path, p.label_path, image_id=p.stem) for p in self.pairs()]

    def save(self, img: LabeledImage, stem: Optional[str] = None) -> SamplePair:
        stem = stem or img.id
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise DatasetIOError(f"cannot create {self.root}: {e}") from e
        pair = SamplePair(stem, self.image_path(stem), self.label_path(stem))
        save_labeled_image(img, pair.image_path, pair.label_path)
        return pair

    def check(self) -> bool:
        """Load every pair once; report the first failure"""
        try:
            images = self.load_all()
        except InsMixError as e:
            logger.error("dataset check failed: %s", e)
            return False
        logger.info("dataset %s: %d pairs readable", self.root, len(images))
        return True
