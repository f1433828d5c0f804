"""
insmix command line

    insmix bank build --data DIR --out FILE
    insmix augment --config cfg.json
    insmix gan train --config cfg.json --out ckpt.bin
    insmix gan smooth --config cfg.json --ckpt ckpt.bin
    insmix baseline --method cutmix --a A.png --b B.png --out OUT.png
    insmix verify --manifest m.jsonl [--config cfg.json] [--replay]
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from augment.bank import bank_summary, build_bank, load_bank, save_bank
from augment.baselines import MixConfig, apply_baseline
from dataset.io import load_rgb, save_rgb
from dataset.store import DatasetStore
from gan.config import GanConfig
from gan.networks import save_params
from gan.train import default_compositor, train_with_metrics, write_metrics
from models.exceptions import (
    ConfigError,
    DatasetIOError,
    InsMixError,
    MissingArtifactError,
    MissingCheckpointError,
)
from pipeline import settings
from pipeline.config import CONFIG_SNAPSHOT, PipelineConfig, load_config
from pipeline.manifest import manifest_frame
from pipeline.runner import load_inputs, run_augment
from pipeline.verify import run_verify

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_CHECKPOINT, EXIT_IO = 0, 1, 2, 3, 4


def cmd_bank_build(args: argparse.Namespace) -> int:
    store = DatasetStore(args.data)
    if not store.check():
        raise DatasetIOError(f"dataset {store.root} has unreadable pairs")
    bank = build_bank(store.load_all())
    save_bank(bank, args.out)
    summary = bank_summary(bank)
    print(f"📊 {summary['count']} templates, area {summary['area_min']}–{summary['area_max']} (median {summary['area_median']:.1f})")
    print(f"📁 Bank cache written: {args.out}")
    return EXIT_OK


def cmd_augment(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    records = run_augment(cfg)
    frame = manifest_frame(records)
    print(f"✅ {len(records)} samples written to {cfg.output_dir}")
    print(f"📊 placements {int(frame['placements'].sum())}, shortfall {int(frame['shortfall'].sum())}, "
          f"shuffled cells {int(frame['shuffled_cells'].sum())}")
    print(f"📁 Manifest: {cfg.manifest_path}")
    return EXIT_OK


def cmd_gan_train(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    updates = {}
    if args.steps is not None:
        updates["steps"] = args.steps
    if settings.seed_override() is not None:
        updates["seed"] = cfg.seed
    gan_cfg = GanConfig.model_validate({**cfg.gan.model_dump(), **updates})
    images = load_inputs(cfg)
    bank = load_bank(cfg.bank_cache, cfg.input_dir) if cfg.bank_cache and cfg.bank_cache.is_file() else build_bank(images)
    compositor = cfg.compositor or default_compositor()
    print(f"🚀 Training smooth-GAN for {gan_cfg.steps} steps on {len(images)} images")
    params, metrics = train_with_metrics(images, bank, gan_cfg, compositor)
    save_params(params, args.out)
    metrics_path = args.metrics or settings.INSMIX_METRICS_CSV
    write_metrics(metrics, metrics_path)
    if len(metrics):
        last = metrics.iloc[-1]
        print(f"📊 final loss_d={last['loss_d']:.4f} loss_adv={last['loss_adv']:.4f} recon={last['recon']:.4f}")
    print(f"📁 Checkpoint: {args.out}")
    print(f"📁 Metrics: {metrics_path}")
    return EXIT_OK


def cmd_gan_smooth(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    stages = list(cfg.stages) if "smooth" in cfg.stages else list(cfg.stages) + ["smooth"]
    cfg = PipelineConfig.model_validate({**cfg.model_dump(), "stages": stages, "gan_checkpoint": args.ckpt})
    records = run_augment(cfg)
    smoothed = sum(r.smoothing_applied for r in records)
    print(f"✅ {len(records)} samples written, {smoothed} smoothed")
    print(f"📁 Manifest: {cfg.manifest_path}")
    return EXIT_OK


def cmd_baseline(args: argparse.Namespace) -> int:
    cfg = MixConfig(
        method=args.method,
        mix_weight=args.mix_weight,
        rect=tuple(args.rect) if args.rect else None,
        cow_sigma=args.cow_sigma,
        cow_p=args.cow_p,
    )
    a = load_rgb(args.a)
    b = load_rgb(args.b) if args.b else None
    seed = settings.seed_override()
    rng = np.random.default_rng(args.seed if seed is None else seed)
    save_rgb(apply_baseline(a, b, cfg, rng), args.out)
    print(f"📁 {cfg.method} written: {args.out}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    manifest = Path(args.manifest)
    config_path = Path(args.config) if args.config else manifest.parent / CONFIG_SNAPSHOT
    if not config_path.is_file():
        raise MissingArtifactError(f"config not found: {config_path}")
    cfg = load_config(config_path, apply_env=False)
    report = run_verify(cfg, manifest, replay=args.replay)
    print(f"📊 {report.records} records, {report.placements} placements checked")
    if report.ok:
        print("✅ No violations")
        return EXIT_OK
    for kind, count in sorted(report.by_kind().items()):
        print(f"❌ {kind}: {count}")
    if args.report:
        report.to_frame().to_csv(args.report, index=False)
        print(f"📁 Violations: {args.report}")
    return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="insmix", description="Copy-paste-smooth nuclei augmentation")
    sub = parser.add_subparsers(dest="command", required=True)

    bank = sub.add_parser("bank", help="instance bank").add_subparsers(dest="bank_command", required=True)
    build = bank.add_parser("build", help="collect every instance of a dataset into a cache file")
    build.add_argument("--data", required=True)
    build.add_argument("--out", required=True)
    build.set_defaults(func=cmd_bank_build)

    augment = sub.add_parser("augment", help="run the configured stages over a dataset")
    augment.add_argument("--config", required=True)
    augment.set_defaults(func=cmd_augment)

    gan = sub.add_parser("gan", help="smooth-GAN").add_subparsers(dest="gan_command", required=True)
    train = gan.add_parser("train", help="train the generator and discriminator")
    train.add_argument("--config", required=True)
    train.add_argument("--out", required=True)
    train.add_argument("--metrics", default=None)
    train.add_argument("--steps", type=int, default=None)
    train.set_defaults(func=cmd_gan_train)
    smooth = gan.add_parser("smooth", help="augment with the smooth stage using a checkpoint")
    smooth.add_argument("--config", required=True)
    smooth.add_argument("--ckpt", required=True)
    smooth.set_defaults(func=cmd_gan_smooth)

    baseline = sub.add_parser("baseline", help="Mix-style comparison augmentation of one image")
    baseline.add_argument("--method", required=True, choices=["mixup", "cutout", "cutmix", "cowout", "cowmix"])
    baseline.add_argument("--a", required=True)
    baseline.add_argument("--b", default=None)
    baseline.add_argument("--out", required=True)
    baseline.add_argument("--mix-weight", type=float, default=0.5)
    baseline.add_argument("--rect", type=int, nargs=4, metavar=("X", "Y", "W", "H"), default=None)
    baseline.add_argument("--cow-sigma", type=float, default=8.0)
    baseline.add_argument("--cow-p", type=float, default=0.5)
    baseline.add_argument("--seed", type=int, default=0)
    baseline.set_defaults(func=cmd_baseline)

    verify = sub.add_parser("verify", help="audit outputs against their manifest")
    verify.add_argument("--manifest", required=True)
    verify.add_argument("--config", default=None)
    verify.add_argument("--replay", action="store_true")
    verify.add_argument("--report", default=None)
    verify.set_defaults(func=cmd_verify)
    return parser


def exit_code(error: BaseException) -> int:
    if isinstance(error, (ConfigError, ValidationError, json.JSONDecodeError)):
        return EXIT_CONFIG
    if isinstance(error, MissingCheckpointError):
        return EXIT_CHECKPOINT
    if isinstance(error, (DatasetIOError, MissingArtifactError, OSError)):
        return EXIT_IO
    return EXIT_ERROR


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=settings.INSMIX_LOG_LEVEL.upper(), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InsMixError, ValidationError, OSError) as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return exit_code(e)


if __name__ == "__main__":
    sys.exit(main())
