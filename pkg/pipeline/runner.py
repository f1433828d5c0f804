"""
Offline augmentation run: bank -> paste -> perturb -> smooth per sample
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, List, Optional, Tuple

from augment.background import ShufflePlan, apply_shuffle, plan_shuffle
from augment.bank import InstanceBank, build_bank, load_bank
from augment.compositor import PlacementPlan, apply_plan, propose_placements
from dataset.store import DatasetStore
from gan.networks import GanParams, load_params
from gan.smooth import smooth
from models.exceptions import DatasetIOError, NoAnchorError, NoOriginalRegionError
from models.types import LabeledImage
from pipeline.config import CONFIG_SNAPSHOT, PipelineConfig
from pipeline.manifest import ManifestRecord, ManifestWriter
from pipeline.rng import derive_seed, sample_rng

logger = logging.getLogger(__name__)


def output_stem(input_id: str, repetition: int) -> str:
    return f"{input_id}_aug{repetition}"


def load_inputs(cfg: PipelineConfig) -> List[LabeledImage]:
    images = DatasetStore(cfg.input_dir).load_all()
    if not images:
        raise DatasetIOError(f"no image / label pairs in {cfg.input_dir}")
    return images


def prepare_bank(cfg: PipelineConfig, images: List[LabeledImage]) -> Optional[InstanceBank]:
    if "paste" not in cfg.stages:
        return None
    if cfg.bank_cache is not None and cfg.bank_cache.is_file():
        logger.info("loading instance bank from %s", cfg.bank_cache)
        return load_bank(cfg.bank_cache, cfg.input_dir)
    return build_bank(images)


def prepare_params(cfg: PipelineConfig, params: Optional[GanParams] = None) -> Optional[GanParams]:
    """Generator weights for the smooth stage; MissingCheckpointError when none are available"""
    if "smooth" not in cfg.stages:
        return None
    if params is not None:
        return params
    return load_params(cfg.gan_checkpoint, cfg.gan.spectral_iterations)


def augment_sample(
    img: LabeledImage,
    image_index: int,
    repetition: int,
    cfg: PipelineConfig,
    bank: Optional[InstanceBank],
    params: Optional[GanParams],
) -> Tuple[LabeledImage, ManifestRecord]:
    """One augmented sample and the record that replays it"""
    seed = derive_seed(cfg.seed, image_index, repetition)
    rng = sample_rng(cfg.seed, image_index, repetition)
    current = img
    plan = PlacementPlan.empty(img.height, img.width)
    shuffle: Optional[ShufflePlan] = None
    smoothed = False

    for stage in cfg.stages:
        if stage == "paste":
            try:
                plan = propose_placements(current, bank, cfg.compositor, rng)
            except NoAnchorError as e:
                logger.warning("%s: paste skipped: %s", img.id, e)
            current = apply_plan(current, plan)
        elif stage == "perturb":
            shuffle = plan_shuffle(current, cfg.perturb, rng)
            current = apply_shuffle(current, shuffle)
        elif stage == "smooth":
            if plan.template_mask.any():
                try:
                    current = smooth(current, plan.template_mask, params)
                    smoothed = True
                except NoOriginalRegionError as e:
                    logger.warning("%s rep %d: smoothing skipped: %s", img.id, repetition, e)

    stem = output_stem(img.id, repetition)
    record = ManifestRecord(
        input_id=img.id,
        image_index=image_index,
        repetition=repetition,
        seed=seed,
        output_image=f"{stem}.png",
        output_labels=f"{stem}_label.png",
        stages=list(cfg.stages),
        constrained=cfg.compositor.constrained if cfg.compositor else True,
        target_count=plan.target_count,
        placements=plan.to_records(),
        shuffle=shuffle.to_record() if shuffle else None,
        smoothing_applied=smoothed,
        checkpoint=str(cfg.gan_checkpoint) if smoothed and cfg.gan_checkpoint else None,
    )
    return current, record


def _tasks(images: List[LabeledImage], repetitions: int) -> Iterable[Tuple[int, int]]:
    return [(i, r) for i in range(len(images)) for r in range(repetitions)]


def run_augment(cfg: PipelineConfig, params: Optional[GanParams] = None) -> List[ManifestRecord]:
    """Write every augmented sample plus manifest.jsonl and a config snapshot under output_dir"""
    if cfg.compositor is not None:
        cfg.compositor.ensure_valid()
    params = prepare_params(cfg, params)
    images = load_inputs(cfg)
    bank = prepare_bank(cfg, images)
    out = DatasetStore(cfg.output_dir)

    def work(task: Tuple[int, int]) -> Tuple[LabeledImage, ManifestRecord]:
        index, rep = task
        return augment_sample(images[index], index, rep, cfg, bank, params)

    records: List[ManifestRecord] = []
    tasks = _tasks(images, cfg.repetitions)
    with ManifestWriter(cfg.manifest_path) as writer:
        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                results = pool.map(work, tasks)
                for sample, record in results:
                    out.save(sample, record.stem)
                    writer.append(record)
                    records.append(record)
        else:
            for sample, record in map(work, tasks):
                out.save(sample, record.stem)
                writer.append(record)
                records.append(record)

    snapshot = cfg.output_dir / CONFIG_SNAPSHOT
    try:
        snapshot.write_text(cfg.model_dump_json(indent=2), encoding="utf-8")
    except OSError as e:
        raise DatasetIOError(f"cannot write {snapshot}: {e}") from e

    placed = sum(len(r.placements) for r in records)
    logger.info("augmented %d samples from %d images (%d placements)", len(records), len(images), placed)
    return records
