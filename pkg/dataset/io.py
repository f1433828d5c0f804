"""
Image / label-map persistence

Image: 8-bit RGB PNG (TIFF accepted on input).
Label map: 16-bit grayscale PNG, pixel value = instance id, 0 = background.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import tifffile
from PIL import Image

from models.exceptions import DatasetIOError, DimensionMismatchError, UnsupportedFormatError
from models.types import LabeledImage

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TIFF_SUFFIXES = (".tif", ".tiff")
LABEL_MODES = ("I;16", "I;16L", "I;16B", "I")


def _read_rgb(path: Path) -> np.ndarray:
    try:
        if path.suffix.lower() in TIFF_SUFFIXES:
            array = np.asarray(tifffile.imread(path))
        else:
            with Image.open(path) as im:
                if im.mode != "RGB":
                    raise UnsupportedFormatError(f"{path.name}: expected 8-bit RGB, got mode {im.mode}")
                array = np.asarray(im)
    except (OSError, ValueError) as e:
        raise DatasetIOError(f"cannot read image {path}: {e}") from e
    if array.dtype != np.uint8 or array.ndim != 3 or array.shape[2] != 3:
        raise UnsupportedFormatError(f"{path.name}: expected H×W×3 uint8, got {array.shape} {array.dtype}")
    return array


def _read_labels(path: Path) -> np.ndarray:
    try:
        if path.suffix.lower() in TIFF_SUFFIXES:
            array = np.asarray(tifffile.imread(path))
            if array.dtype != np.uint16 or array.ndim != 2:
                raise UnsupportedFormatError(f"{path.name}: expected single-channel uint16, got {array.shape} {array.dtype}")
            return array
        with Image.open(path) as im:
            if im.mode not in LABEL_MODES:
                raise UnsupportedFormatError(f"{path.name}: label map must be 16-bit grayscale, got mode {im.mode}")
            array = np.asarray(im)
    except (OSError, ValueError) as e:
        raise DatasetIOError(f"cannot read label map {path}: {e}") from e
    if array.ndim != 2:
        raise UnsupportedFormatError(f"{path.name}: label map must be single-channel")
    if array.size and (array.min() < 0 or array.max() > 0xFFFF):
        raise UnsupportedFormatError(f"{path.name}: label ids outside the 16-bit range")
    return array.astype(np.uint16)


def load_labeled_image(image_path: PathLike, labelmap_path: PathLike, image_id: Optional[str] = None) -> LabeledImage:
    """Load and cross-check an image / label-map pair"""
    image_path, labelmap_path = Path(image_path), Path(labelmap_path)
    for p in (image_path, labelmap_path):
        if not p.is_file():
            raise DatasetIOError(f"missing file: {p}")
    pixels = _read_rgb(image_path)
    labels = _read_labels(labelmap_path)
    if pixels.shape[:2] != labels.shape:
        raise DimensionMismatchError(
            f"{image_path.name} is {pixels.shape[1]}×{pixels.shape[0]} but "
            f"{labelmap_path.name} is {labels.shape[1]}×{labels.shape[0]}"
        )
    return LabeledImage(pixels=pixels, labels=labels, id=image_id if image_id is not None else image_path.stem)


def save_labeled_image(img: LabeledImage, image_path: PathLike, labelmap_path: PathLike) -> None:
    """Write the RGB PNG and the 16-bit label PNG"""
    image_path, labelmap_path = Path(image_path), Path(labelmap_path)
    try:
        Image.fromarray(np.ascontiguousarray(img.pixels)).save(image_path, format="PNG")
        Image.fromarray(np.ascontiguousarray(img.labels, dtype=np.uint16)).save(labelmap_path, format="PNG")
    except OSError as e:
        raise DatasetIOError(f"cannot write {image_path.name}/{labelmap_path.name}: {e}") from e
    logger.debug("saved %s → %s, %s", img.id, image_path, labelmap_path)


def load_rgb(path: PathLike) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise DatasetIOError(f"missing file: {path}")
    return _read_rgb(path)


def save_rgb(pixels: np.ndarray, path: PathLike) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(np.ascontiguousarray(pixels, dtype=np.uint8)).save(path, format="PNG")
    except OSError as e:
        raise DatasetIOError(f"cannot write {path}: {e}") from e
