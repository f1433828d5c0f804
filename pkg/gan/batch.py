"""
Training batches assembled on the fly from the dataset and the compositor
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from augment.bank import InstanceBank
from augment.compositor import CompositorConfig, apply_plan, propose_placements
from gan.fse import downsample_mask
from gan.networks import GENERATOR_STRIDE
from models.exceptions import ConfigError, NoAnchorError, NoCandidateError
from models.types import LabeledImage

logger = logging.getLogger(__name__)


def to_unit(pixels: np.ndarray) -> np.ndarray:
    """H×W×3 uint8 -> 1×3×H×W float64 in [0, 1]"""
    return (np.asarray(pixels, dtype=np.float64) / 255.0).transpose(2, 0, 1)[None]


def to_uint8(values: np.ndarray) -> np.ndarray:
    """1×3×H×W in [0, 1] -> H×W×3 uint8, rounding half up"""
    scaled = np.floor(np.clip(values[0], 0.0, 1.0) * 255.0 + 0.5)
    return scaled.transpose(1, 2, 0).astype(np.uint8)


@dataclass(frozen=True)
class TrainBatch:
    u: np.ndarray
    m: np.ndarray
    m_o: np.ndarray
    x_a: np.ndarray
    x_p: np.ndarray

    def __post_init__(self) -> None:
        extents = {a.shape[-2:] for a in (self.u, self.m, self.m_o, self.x_a, self.x_p)}
        if len(extents) != 1:
            raise ConfigError(f"batch members disagree in extents: {sorted(extents)}")
        if np.any(self.m & self.m_o):
            raise ConfigError("template and original masks overlap")


def random_crop(img: LabeledImage, crop: int, rng: np.random.Generator) -> LabeledImage:
    if img.height < crop or img.width < crop:
        raise ConfigError(f"{img.id} is {img.width}×{img.height}, smaller than crop {crop}")
    x = int(rng.integers(0, img.width - crop + 1))
    y = int(rng.integers(0, img.height - crop + 1))
    return img.crop(x, y, crop, crop)


def sample_batch(
    dataset: Sequence[LabeledImage],
    bank: InstanceBank,
    compositor: CompositorConfig,
    crop: int,
    rng: np.random.Generator,
    max_tries: int = 200,
) -> TrainBatch:
    """u and M from the compositor on a random crop; x_a, x_p independent raw crops.

    Crops without instances, without any accepted placement, or whose visible
    originals vanish at feature resolution are drawn again.
    """
    for attempt in range(max_tries):
        base = random_crop(dataset[int(rng.integers(len(dataset)))], crop, rng)
        try:
            plan = propose_placements(base, bank, compositor, rng)
        except NoAnchorError:
            continue
        if not plan.placements:
            continue
        augmented = apply_plan(base, plan)
        m = plan.template_mask
        m_o = (base.labels != 0) & ~m
        if downsample_mask(m, GENERATOR_STRIDE).any() and not (
            downsample_mask(m_o, GENERATOR_STRIDE) & ~downsample_mask(m, GENERATOR_STRIDE)
        ).any():
            continue
        if attempt:
            logger.warning("training batch needed %d resamples", attempt)
        x_a = random_crop(dataset[int(rng.integers(len(dataset)))], crop, rng)
        x_p = random_crop(dataset[int(rng.integers(len(dataset)))], crop, rng)
        return TrainBatch(
            u=to_unit(augmented.pixels),
            m=m[None, None],
            m_o=m_o[None, None],
            x_a=to_unit(x_a.pixels),
            x_p=to_unit(x_p.pixels),
        )
    raise NoCandidateError(f"no usable training crop after {max_tries} draws")
