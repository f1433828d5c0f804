"""
Read-only HTTP service over a dataset, its augmentation output and training metrics
"""
import pandas as pd
import pytest
from fastapi.testclient import TestClient

from api.main import app, get_workspace
from api.utils import Workspace
from augment.ssd import check_ssd
from dataset.instances import extract_instances
from gan.train import write_metrics
from pipeline.runner import run_augment


@pytest.fixture
def workspace(tmp_path, pipeline_config):
    run_augment(pipeline_config)
    metrics = pd.DataFrame({"step": [1, 2, 3, 4], "loss_d": [1.0, 0.8, 0.6, 0.4],
                            "loss_adv": [0.1, 0.2, 0.3, 0.4], "recon": [0.4, 0.3, 0.2, 0.1]})
    write_metrics(metrics, tmp_path / "metrics.csv")
    return Workspace(pipeline_config.input_dir, pipeline_config.output_dir,
                     pipeline_config.manifest_name, tmp_path / "metrics.csv")


@pytest.fixture
def client(workspace):
    app.dependency_overrides[get_workspace] = lambda: workspace
    yield TestClient(app)
    app.dependency_overrides.clear()


def test_root_and_health(client):
    assert "/ssd/check" in client.get("/").json()["endpoints"]
    health = client.get("/health").json()
    assert health["manifest_present"] and health["metrics_present"]


def test_bank_endpoints(client, bank):
    summary = client.get("/bank/summary").json()
    assert summary["count"] == len(bank)
    page = client.get("/bank/instances", params={"limit": 3, "offset": 1}).json()
    assert page["total"] == len(bank)
    assert [row["label"] for row in page["instances"]] == [e.label for e in bank.entries[1:4]]
    only = client.get("/bank/instances", params={"source_id": "syn_002"}).json()
    assert all(row["source_id"] == "syn_002" for row in only["instances"])


def test_ssd_check(client, synthetic_images, ssd_config):
    anchor, template = extract_instances(synthetic_images[0])[:2]
    target = (anchor.centroid[0] + 12.0, anchor.centroid[1])
    body = {
        "anchor": {"source_id": anchor.source_id, "label": anchor.label},
        "template": {"source_id": template.source_id, "label": template.label},
        "target": list(target),
        "ssd": ssd_config.model_dump(),
    }
    response = client.post("/ssd/check", json=body)
    assert response.status_code == 200
    expected = check_ssd(anchor, template, target, ssd_config)
    result = response.json()
    assert result["passed"] == expected.passed
    assert result["scale"] == pytest.approx(expected.scale)
    assert result["distance"] == pytest.approx(12.0)

    body["template"]["label"] = 999
    assert client.post("/ssd/check", json=body).status_code == 404
    body["ssd"] = {"epsilon": 3.0, "rho": 0.5, "delta": 50.0, "gamma": 10.0}
    assert client.post("/ssd/check", json=body).status_code == 422


def test_manifest_endpoints(client, pipeline_config, synthetic_images):
    summary = client.get("/manifest/summary").json()
    assert summary["samples"] == len(synthetic_images) * pipeline_config.repetitions
    assert summary["inputs"] == len(synthetic_images)
    assert summary["shortfall"] == summary["target_placements"] - summary["placements"]
    records = client.get("/manifest/records", params={"input_id": "syn_001"}).json()
    assert records["total"] == pipeline_config.repetitions
    assert {r["input_id"] for r in records["records"]} == {"syn_001"}


def test_training_metrics(client):
    body = client.get("/metrics/training", params={"window": 2, "every": 2}).json()
    assert body["steps"] == 4
    rows = body["metrics"]
    assert [r["step"] for r in rows] == [1, 3]
    assert rows[1]["recon_ma"] == pytest.approx(0.25)


def test_missing_artifacts_are_404(tmp_path, dataset_dir):
    empty = Workspace(dataset_dir, tmp_path / "nothing", "manifest.jsonl", tmp_path / "none.csv")
    app.dependency_overrides[get_workspace] = lambda: empty
    try:
        client = TestClient(app)
        assert client.get("/manifest/summary").status_code == 404
        assert client.get("/metrics/training").status_code == 404
        assert client.get("/bank/summary").status_code == 200
    finally:
        app.dependency_overrides.clear()
