"""
Shared fixtures: seeded synthetic datasets written to temporary directories
"""
import os

import numpy as np
import pytest

from augment.background import PerturbConfig
from augment.bank import build_bank
from augment.compositor import CompositorConfig
from augment.ssd import SsdConfig
from dataset.store import DatasetStore
from dataset.synthetic import generate_synthetic_dataset
from gan.networks import init_params
from pipeline.config import PipelineConfig


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance checks (set INSMIX_RUN_SLOW=1)")


def pytest_collection_modifyitems(config, items):
    if os.getenv("INSMIX_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set INSMIX_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def _no_seed_override(monkeypatch):
    monkeypatch.delenv("INSMIX_SEED", raising=False)


@pytest.fixture
def synthetic_images():
    return generate_synthetic_dataset(6, size=(64, 64), seed=7)


@pytest.fixture
def dataset_dir(tmp_path, synthetic_images):
    store = DatasetStore(tmp_path / "train")
    for img in synthetic_images:
        store.save(img)
    return store.root


@pytest.fixture
def bank(synthetic_images):
    return build_bank(synthetic_images)


@pytest.fixture
def ssd_config():
    return SsdConfig(epsilon=3.0, rho=1.0, delta=5.0, gamma=40.0)


@pytest.fixture
def compositor_config(ssd_config):
    return CompositorConfig(paste_ratio=1.0, max_attempts=100, occlusion_cap=0.3, ssd=ssd_config)


@pytest.fixture
def pipeline_config(tmp_path, dataset_dir, compositor_config):
    return PipelineConfig(
        input_dir=dataset_dir,
        output_dir=tmp_path / "out",
        seed=11,
        repetitions=2,
        stages=["paste", "perturb"],
        compositor=compositor_config,
        perturb=PerturbConfig(alpha=0.5, patch_size=8),
    )


@pytest.fixture
def tiny_params():
    return init_params(2, np.random.default_rng(0))
