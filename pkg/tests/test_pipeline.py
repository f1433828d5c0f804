"""
Seeded augmentation runs, manifest, verify / replay, CLI exit codes and ablation
"""
import json

import numpy as np
import pytest

from augment.ssd import check_ssd
from dataset.instances import extract_instances
from dataset.io import load_labeled_image, save_labeled_image
from dataset.store import DatasetStore
from gan.networks import save_params
from models.exceptions import MissingArtifactError, MissingCheckpointError
from pipeline.ablation import VARIANTS, run_ablation
from pipeline.cli import main
from pipeline.config import CONFIG_SNAPSHOT, PipelineConfig, load_config
from pipeline.manifest import ManifestRecord, manifest_frame, read_manifest
from pipeline.replay import replay_record
from pipeline.rng import derive_seed, splitmix64
from pipeline.runner import run_augment
from pipeline.verify import pixel_ssd, run_verify


def _tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def _write_config(path, cfg):
    path.write_text(cfg.model_dump_json(), encoding="utf-8")
    return path


def _with(cfg, **changes):
    return PipelineConfig.model_validate({**cfg.model_dump(), **changes})


def test_splitmix_reference_value():
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_derive_seed_streams_are_distinct():
    seeds = {derive_seed(11, i, r) for i in range(20) for r in range(5)}
    assert len(seeds) == 100
    assert derive_seed(11, 3, 2) == derive_seed(11, 3, 2)
    assert derive_seed(11, 3, 2) != derive_seed(12, 3, 2)


def test_run_writes_outputs_manifest_and_snapshot(pipeline_config, synthetic_images):
    records = run_augment(pipeline_config)
    assert len(records) == len(synthetic_images) * pipeline_config.repetitions
    assert [(r.image_index, r.repetition) for r in records] == [
        (i, r) for i in range(len(synthetic_images)) for r in range(pipeline_config.repetitions)
    ]
    out = pipeline_config.output_dir
    assert (out / CONFIG_SNAPSHOT).is_file()
    assert [r.model_dump() for r in read_manifest(pipeline_config.manifest_path)] == [r.model_dump() for r in records]
    for rec in records:
        assert (out / rec.output_image).is_file() and (out / rec.output_labels).is_file()
        assert rec.seed == derive_seed(pipeline_config.seed, rec.image_index, rec.repetition)
    assert sum(len(r.placements) for r in records) > 0


def test_runs_are_byte_identical(tmp_path, pipeline_config):
    run_augment(pipeline_config)
    first = _tree(pipeline_config.output_dir)
    run_augment(pipeline_config)
    assert _tree(pipeline_config.output_dir) == first

    threaded = _with(pipeline_config, output_dir=tmp_path / "threaded", workers=3)
    run_augment(threaded)
    second = _tree(threaded.output_dir)
    del first[CONFIG_SNAPSHOT], second[CONFIG_SNAPSHOT]
    assert second == first


def test_smooth_runs_are_byte_identical(tmp_path, pipeline_config, tiny_params):
    ckpt = tmp_path / "gan.bin"
    save_params(tiny_params, ckpt)
    cfg = _with(pipeline_config, stages=["paste", "perturb", "smooth"], gan_checkpoint=ckpt)
    records = run_augment(cfg)
    first = _tree(cfg.output_dir)
    run_augment(cfg)
    assert _tree(cfg.output_dir) == first
    assert any(r.smoothing_applied for r in records)
    assert all(r.checkpoint == str(ckpt) for r in records if r.smoothing_applied)
    assert run_verify(cfg, replay=True).ok


def test_zero_paste_ratio_is_identity(pipeline_config, synthetic_images):
    compositor = pipeline_config.compositor.model_copy(update={"paste_ratio": 0.0})
    cfg = _with(pipeline_config, stages=["paste"], compositor=compositor.model_dump())
    records = run_augment(cfg)
    originals = {img.id: img for img in synthetic_images}
    for rec in records:
        out = load_labeled_image(cfg.output_dir / rec.output_image, cfg.output_dir / rec.output_labels)
        assert out.equals(originals[rec.input_id])
        assert rec.placements == [] and rec.target_count == 0


def test_verify_clean_run(pipeline_config):
    run_augment(pipeline_config)
    report = run_verify(pipeline_config, replay=True)
    assert report.ok, report.by_kind()
    assert report.records == 12 and report.placements > 0


def test_replay_matches_written_output(pipeline_config):
    records = run_augment(pipeline_config)
    out = DatasetStore(pipeline_config.output_dir)
    for rec in records:
        assert replay_record(pipeline_config, rec).equals(out.load(rec.stem))


def test_moved_placement_is_a_distance_violation(tmp_path, pipeline_config):
    records = run_augment(pipeline_config)
    edited = [r.model_copy(deep=True) for r in records]
    victim = next(r for r in edited if r.placements)
    placement = victim.placements[0]
    anchor_img = DatasetStore(pipeline_config.input_dir).load(victim.input_id)
    ys, xs = np.nonzero(anchor_img.labels == placement["anchor"])
    gamma = pipeline_config.compositor.ssd.gamma
    placement["target"] = [int(np.floor(xs.mean() + gamma + 50 + 0.5)), int(np.floor(ys.mean() + 0.5))]

    manifest = tmp_path / "edited.jsonl"
    manifest.write_text("".join(r.model_dump_json() + "\n" for r in edited), encoding="utf-8")
    report = run_verify(pipeline_config, manifest=manifest)
    assert report.count("distance") == 1
    assert not report.ok


def test_tampered_labels_are_reported(pipeline_config):
    records = run_augment(pipeline_config)
    rec = records[0]
    out = pipeline_config.output_dir
    img = load_labeled_image(out / rec.output_image, out / rec.output_labels)
    labels = img.labels.copy()
    labels[0, 0] = 999 if labels[0, 0] != 999 else 998
    save_labeled_image(img.replace(labels=labels), out / rec.output_image, out / rec.output_labels)
    report = run_verify(pipeline_config)
    assert report.count("labels") == 1
    assert list(report.to_frame().columns) == ["sample", "kind", "detail"]


def test_empty_and_missing_manifest(tmp_path, pipeline_config):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    report = run_verify(pipeline_config, manifest=empty)
    assert report.ok and report.records == 0
    with pytest.raises(MissingArtifactError):
        run_verify(pipeline_config, manifest=tmp_path / "absent.jsonl")


def test_smooth_without_checkpoint(pipeline_config):
    cfg = _with(pipeline_config, stages=["paste", "smooth"])
    with pytest.raises(MissingCheckpointError):
        run_augment(cfg)
    assert not cfg.output_dir.exists()


def test_manifest_frame(pipeline_config):
    records = run_augment(pipeline_config)
    frame = manifest_frame(records)
    assert len(frame) == len(records)
    assert (frame["shortfall"] == (frame["target_count"] - frame["placements"]).clip(lower=0)).all()
    assert frame["shuffled_cells"].sum() > 0
    assert manifest_frame([]).empty


def test_seed_override(tmp_path, pipeline_config, monkeypatch):
    path = _write_config(tmp_path / "cfg.json", pipeline_config)
    assert load_config(path).seed == 11
    monkeypatch.setenv("INSMIX_SEED", "0x10")
    assert load_config(path).seed == 16
    assert load_config(path, apply_env=False).seed == 11


def test_config_validation(pipeline_config):
    with pytest.raises(ValueError):
        _with(pipeline_config, stages=[])
    with pytest.raises(ValueError):
        _with(pipeline_config, stages=["paste", "paste"])
    with pytest.raises(ValueError):
        _with(pipeline_config, compositor=None)
    _with(pipeline_config, stages=["perturb"], compositor=None)


def test_cli_augment_and_verify(tmp_path, pipeline_config, capsys):
    path = _write_config(tmp_path / "cfg.json", pipeline_config)
    assert main(["augment", "--config", str(path)]) == 0
    assert main(["verify", "--manifest", str(pipeline_config.manifest_path)]) == 0
    assert "No violations" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path, pipeline_config):
    smooth_cfg = _write_config(tmp_path / "smooth.json", _with(pipeline_config, stages=["paste", "smooth"]))
    assert main(["augment", "--config", str(smooth_cfg)]) == 3
    assert not pipeline_config.output_dir.exists()

    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    assert main(["augment", "--config", str(broken)]) == 2

    no_compositor = tmp_path / "no_compositor.json"
    data = json.loads(pipeline_config.model_dump_json())
    data["compositor"] = None
    no_compositor.write_text(json.dumps(data), encoding="utf-8")
    assert main(["augment", "--config", str(no_compositor)]) == 2

    missing_input = _write_config(tmp_path / "missing.json", _with(pipeline_config, input_dir=tmp_path / "nowhere"))
    assert main(["augment", "--config", str(missing_input)]) == 4
    assert main(["verify", "--manifest", str(tmp_path / "absent" / "m.jsonl")]) == 4


def test_cli_bank_and_baseline(tmp_path, dataset_dir):
    cache = tmp_path / "bank.jsonl"
    assert main(["bank", "build", "--data", str(dataset_dir), "--out", str(cache)]) == 0
    assert cache.is_file()
    a = dataset_dir / "syn_000.png"
    out = tmp_path / "mixed.png"
    assert main(["baseline", "--method", "cutmix", "--a", str(a), "--b", str(dataset_dir / "syn_001.png"),
                 "--out", str(out), "--rect", "0", "0", "8", "8"]) == 0
    assert out.is_file()
    assert main(["baseline", "--method", "mixup", "--a", str(a), "--out", str(out)]) == 1


def test_bank_cache_is_used(tmp_path, pipeline_config):
    cache = tmp_path / "bank.jsonl"
    assert main(["bank", "build", "--data", str(pipeline_config.input_dir), "--out", str(cache)]) == 0
    cached = _with(pipeline_config, bank_cache=cache, output_dir=tmp_path / "cached")
    run_augment(pipeline_config)
    run_augment(cached)
    first, second = _tree(pipeline_config.output_dir), _tree(cached.output_dir)
    del first[CONFIG_SNAPSHOT], second[CONFIG_SNAPSHOT]
    assert first == second


def test_ablation_variants(pipeline_config, synthetic_images):
    table = run_ablation(pipeline_config)
    assert list(table["variant"]) == [v.name for v in VARIANTS]
    status = dict(zip(table["variant"], table["status"]))
    assert status["ssd_smooth"] == status["ssd_perturb_smooth"] == "skipped"
    done = table[table["status"] == "ok"]
    assert (done["samples"] == len(synthetic_images) * pipeline_config.repetitions).all()
    plain = read_manifest(pipeline_config.output_dir / "copy_paste" / pipeline_config.manifest_name)
    assert not any(r.constrained for r in plain)
    perturb_only = done.set_index("variant").loc["perturb"]
    assert perturb_only["placements"] == 0 and perturb_only["shuffled_cells"] > 0


def test_record_stem():
    rec = ManifestRecord(input_id="a", image_index=0, repetition=1, seed=5, output_image="a_aug1.png",
                         output_labels="a_aug1_label.png", stages=["paste"])
    assert rec.stem == "a_aug1"


def test_pixel_ssd_agrees_with_constraint_check(synthetic_images, ssd_config):
    for img in synthetic_images:
        instances = extract_instances(img)
        for anchor in instances:
            for template in instances:
                target = (anchor.centroid[0] + 12.0, anchor.centroid[1] - 5.0)
                expected = check_ssd(anchor, template, target, ssd_config)
                audited = pixel_ssd(anchor, template, target, ssd_config)
                assert audited.scale == expected.scale
                assert audited.shape == expected.shape
                assert audited.distance == pytest.approx(expected.distance, abs=1e-9)
                assert audited.violated == expected.violated


def test_verify_recomputes_ssd_itself(pipeline_config, monkeypatch):
    run_augment(pipeline_config)
    compositor = pipeline_config.compositor.model_dump()
    compositor["ssd"]["rho"] = 0.0
    strict = _with(pipeline_config, compositor=compositor)
    monkeypatch.setattr("augment.ssd.f_shape", lambda mo, mt: 0.0)
    report = run_verify(strict)
    assert report.count("shape") > 0


def test_cli_bank_build_rejects_unreadable_pairs(tmp_path, dataset_dir):
    broken = tmp_path / "broken"
    broken.mkdir()
    for path in dataset_dir.iterdir():
        (broken / path.name).write_bytes(path.read_bytes())
    (broken / "syn_001_label.png").write_bytes(b"not a png")
    cache = tmp_path / "bank.jsonl"
    assert main(["bank", "build", "--data", str(broken), "--out", str(cache)]) == 4
    assert not cache.exists()
    assert main(["bank", "build", "--data", str(tmp_path / "nowhere"), "--out", str(cache)]) == 4
