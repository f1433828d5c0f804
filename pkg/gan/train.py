"""
Alternating discriminator / generator optimization
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from augment.bank import InstanceBank
from augment.compositor import CompositorConfig
from augment.ssd import RECOMMENDED_SSD, SsdConfig
from autodiff.optim import Adam
from autodiff.tensor import no_grad
from dataset.io import PathLike
from gan.batch import TrainBatch, sample_batch
from gan.config import GanConfig
from gan.losses import compose, loss_D, loss_G
from gan.networks import (
    DISCRIMINATOR_STRIDE,
    GanParams,
    discriminator_leaves,
    generator_apply,
    generator_leaves,
    init_params,
    spectral_weights,
)
from models.exceptions import ConfigError, DatasetIOError, NonFiniteError

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ["step", "loss_d", "loss_adv", "recon"]

StepCallback = Callable[[int, float, float, float], None]


def default_compositor() -> CompositorConfig:
    return CompositorConfig(ssd=SsdConfig(**RECOMMENDED_SSD))


def _grads(leaves) -> dict:
    return {k: t.grad for k, t in leaves.items() if t.grad is not None}


def discriminator_step(params: GanParams, batch: TrainBatch, cfg: GanConfig, opt: Adam) -> float:
    """One update of the discriminator; advances the spectral states"""
    d_leaves = discriminator_leaves(params, requires_grad=True)
    weights = spectral_weights(d_leaves, params.spectral, update=True)
    with no_grad():
        g = generator_apply(batch.u, batch.m, batch.m_o, generator_leaves(params, requires_grad=False))
        s_u = compose(batch.u, g, batch.m)
    loss = loss_D(batch.x_a, batch.x_p, s_u, weights, cfg.margin)
    if loss.requires_grad:
        loss.backward()
        opt.step(params.discriminator, _grads(d_leaves))
    return loss.item()


def generator_step(params: GanParams, batch: TrainBatch, cfg: GanConfig, opt: Adam) -> Tuple[float, float]:
    g_leaves = generator_leaves(params, requires_grad=True)
    with no_grad():
        weights = spectral_weights(discriminator_leaves(params, requires_grad=False), params.spectral, update=False)
    g = generator_apply(batch.u, batch.m, batch.m_o, g_leaves)
    losses = loss_G(batch.x_a, batch.x_p, batch.u, g, batch.m, weights, cfg.lam)
    losses.total.backward()
    opt.step(params.generator, _grads(g_leaves))
    return losses.adv.item(), losses.recon.item()


def train_with_metrics(
    dataset: Sequence,
    bank: InstanceBank,
    cfg: GanConfig,
    compositor: Optional[CompositorConfig] = None,
    params: Optional[GanParams] = None,
    on_step: Optional[StepCallback] = None,
) -> Tuple[GanParams, pd.DataFrame]:
    if not dataset:
        raise ConfigError("training needs at least one image")
    if cfg.crop % DISCRIMINATOR_STRIDE:
        raise ConfigError(f"training crop {cfg.crop} must be divisible by {DISCRIMINATOR_STRIDE}")
    compositor = compositor or default_compositor()
    rng = np.random.default_rng(cfg.seed)
    params = params if params is not None else init_params(cfg.base_channels, rng, cfg.spectral_iterations)
    opt_g = Adam(cfg.lr_g, cfg.betas)
    opt_d = Adam(cfg.lr_d, cfg.betas)

    rows: List[Tuple[int, float, float, float]] = []
    for step in range(1, cfg.steps + 1):
        batch = sample_batch(dataset, bank, compositor, cfg.crop, rng, cfg.max_batch_tries)
        try:
            ld = discriminator_step(params, batch, cfg, opt_d)
            adv, recon = generator_step(params, batch, cfg, opt_g)
        except NonFiniteError as e:
            raise NonFiniteError(f"step {step}: {e}") from e
        if not all(np.isfinite(v) for v in (ld, adv, recon)) or not params.all_finite():
            raise NonFiniteError(f"step {step}: loss_d={ld} loss_adv={adv} recon={recon}")
        rows.append((step, ld, adv, recon))
        if on_step is not None:
            on_step(step, ld, adv, recon)
        if step % cfg.log_every == 0:
            logger.info("step %d/%d  loss_d=%.4f  loss_adv=%.4f  recon=%.4f", step, cfg.steps, ld, adv, recon)

    return params, pd.DataFrame(rows, columns=METRIC_COLUMNS)


def train(dataset: Sequence, bank: InstanceBank, cfg: GanConfig, compositor: Optional[CompositorConfig] = None) -> GanParams:
    params, _ = train_with_metrics(dataset, bank, cfg, compositor)
    return params


def write_metrics(metrics: pd.DataFrame, path: PathLike) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        metrics.to_csv(path, index=False, columns=METRIC_COLUMNS)
    except OSError as e:
        raise DatasetIOError(f"cannot write metrics {path}: {e}") from e


def read_metrics(path: PathLike) -> pd.DataFrame:
    try:
        return pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as e:
        raise DatasetIOError(f"cannot read metrics {path}: {e}") from e


def moving_average(metrics: pd.DataFrame, column: str = "recon", window: int = 100) -> pd.Series:
    return metrics[column].rolling(window=window, min_periods=1).mean()
