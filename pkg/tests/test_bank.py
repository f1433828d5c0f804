"""
Instance bank construction, filtering, sampling and the JSON-lines cache
"""
from collections import Counter

import numpy as np
import pytest
from pydantic import ValidationError

from augment.bank import TemplateFilter, bank_summary, build_bank, load_bank, sample_template, save_bank
from dataset.instances import extract_instances
from dataset.store import DatasetStore
from models.exceptions import DatasetIOError, EmptyBankError, NoCandidateError
from models.types import LabeledImage


def _ten_blobs():
    labels = np.zeros((40, 40), dtype=np.uint16)
    for i in range(10):
        r, c = divmod(i, 5)
        labels[r * 10:r * 10 + 2 + (i % 3), c * 8:c * 8 + 3] = i + 1
    return LabeledImage(np.zeros((40, 40, 3), dtype=np.uint8), labels, id="blobs")


def test_build_bank_counts_every_instance(synthetic_images, bank):
    assert len(bank) == sum(len(extract_instances(img)) for img in synthetic_images)
    areas = [bank.entries[i].area for i in bank.area_index]
    assert areas == sorted(areas)


def test_empty_dataset():
    blank = LabeledImage(np.zeros((4, 4, 3), dtype=np.uint8), np.zeros((4, 4), dtype=np.uint16))
    with pytest.raises(EmptyBankError):
        build_bank([blank])
    with pytest.raises(EmptyBankError):
        build_bank([])


def test_filter_is_respected(bank):
    rng = np.random.default_rng(3)
    areas = sorted(e.area for e in bank.entries)
    for _ in range(50):
        lo, hi = sorted(rng.choice(areas, size=2))
        flt = TemplateFilter(area_min=float(lo), area_max=float(hi), exclude_source="syn_001")
        if not bank.candidates(flt):
            continue
        for _ in range(5):
            inst = sample_template(bank, flt, rng)
            assert lo <= inst.area <= hi
            assert inst.source_id != "syn_001"


def test_no_candidate(bank):
    with pytest.raises(NoCandidateError):
        sample_template(bank, TemplateFilter(area_min=1e9), np.random.default_rng(0))


def test_filter_validation():
    with pytest.raises(ValidationError):
        TemplateFilter(area_min=10, area_max=5)
    with pytest.raises(ValidationError):
        TemplateFilter(area_min=-1)


def test_sampling_is_uniform():
    bank = build_bank([_ten_blobs()])
    assert len(bank) == 10
    rng = np.random.default_rng(2024)
    draws = Counter(sample_template(bank, TemplateFilter(), rng).label for _ in range(10_000))
    for label in range(1, 11):
        assert abs(draws[label] / 10_000 - 0.1) <= 0.05


def test_summary(bank, synthetic_images):
    summary = bank_summary(bank)
    assert summary["count"] == len(bank)
    assert summary["area_min"] <= summary["area_median"] <= summary["area_max"]
    assert sum(summary["per_source"].values()) == len(bank)
    assert set(summary["per_source"]) == {img.id for img in synthetic_images}


def test_cache_round_trip(tmp_path, dataset_dir, bank):
    cache = tmp_path / "bank.jsonl"
    save_bank(bank, cache)
    loaded = load_bank(cache, dataset_dir)
    assert [e.key for e in loaded.entries] == [e.key for e in bank.entries]
    assert [e.area for e in loaded.entries] == [e.area for e in bank.entries]


def test_stale_cache_is_rejected(tmp_path, dataset_dir, bank, synthetic_images):
    cache = tmp_path / "bank.jsonl"
    save_bank(bank, cache)
    img = synthetic_images[0]
    labels = img.labels.copy()
    labels[labels == 1] = 0
    DatasetStore(dataset_dir).save(img.replace(labels=labels))
    with pytest.raises(DatasetIOError):
        load_bank(cache, dataset_dir)


def test_unreadable_cache(tmp_path, dataset_dir):
    with pytest.raises(DatasetIOError):
        load_bank(tmp_path / "absent.jsonl", dataset_dir)
