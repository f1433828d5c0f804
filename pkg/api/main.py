"""
🔬 InsMix API - read-only view of a dataset, its augmentation run and GAN training
"""
from typing import List, Optional

from fastapi import Depends, FastAPI, Query
from fastapi.middleware.cors import CORSMiddleware

from api.models import BankSummary, HealthCheck, InstanceInfo, ManifestSummary, SsdCheckRequest, SsdCheckResponse
from api.utils import Workspace, frame_to_rows, to_http
from augment.bank import bank_summary
from augment.ssd import check_ssd
from dataset.instances import find_instance
from models.exceptions import InsMixError
from models.types import Transform
from pipeline.manifest import manifest_frame

app = FastAPI(
    title="🔬 InsMix API",
    description="Instance bank, SSD checks, augmentation manifest and smooth-GAN training metrics",
    version="1.0.0",
    docs_url="/docs",
    redoc_url="/redoc",
)
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

_workspace = Workspace()


def get_workspace() -> Workspace:
    return _workspace


@app.get("/")
async def root():
    return {
        "message": "🔬 InsMix API is running!",
        "endpoints": [
            "/health",
            "/bank/summary",
            "/bank/instances",
            "/ssd/check",
            "/manifest/records",
            "/manifest/summary",
            "/metrics/training",
        ],
    }


@app.get("/health", response_model=HealthCheck)
async def health_check(ws: Workspace = Depends(get_workspace)):
    return HealthCheck(
        status="healthy ✅",
        data_dir=str(ws.data_dir),
        manifest_present=ws.manifest_path.is_file(),
        metrics_present=ws.metrics_path.is_file(),
    )


@app.get("/bank/summary", response_model=BankSummary)
def get_bank_summary(ws: Workspace = Depends(get_workspace)):
    try:
        return BankSummary(**bank_summary(ws.bank()))
    except InsMixError as e:
        raise to_http(e)


@app.get("/bank/instances")
def get_bank_instances(
    limit: int = Query(100, ge=1, le=5000),
    offset: int = Query(0, ge=0),
    source_id: Optional[str] = None,
    ws: Workspace = Depends(get_workspace),
):
    try:
        entries = ws.bank().entries
    except InsMixError as e:
        raise to_http(e)
    if source_id is not None:
        entries = [e for e in entries if e.source_id == source_id]
    rows: List[InstanceInfo] = [InstanceInfo(**e.to_record()) for e in entries[offset:offset + limit]]
    return {"instances": rows, "total": len(entries)}


@app.post("/ssd/check", response_model=SsdCheckResponse)
def post_ssd_check(request: SsdCheckRequest, ws: Workspace = Depends(get_workspace)):
    try:
        anchor = find_instance(ws.store.load(request.anchor.source_id), request.anchor.label)
        template = find_instance(ws.store.load(request.template.source_id), request.template.label)
        if request.transform:
            template = template.transformed(Transform.from_dict(request.transform))
        report = check_ssd(anchor, template, request.target, request.ssd)
    except (InsMixError, KeyError) as e:
        raise to_http(e)
    return SsdCheckResponse(
        scale=report.scale,
        shape=report.shape,
        distance=report.distance,
        passed=report.passed,
        violated=sorted(report.violated),
    )


@app.get("/manifest/records")
def get_manifest_records(
    limit: int = Query(100, ge=1, le=10000),
    input_id: Optional[str] = None,
    ws: Workspace = Depends(get_workspace),
):
    try:
        records = ws.records()
    except InsMixError as e:
        raise to_http(e)
    if input_id is not None:
        records = [r for r in records if r.input_id == input_id]
    return {"records": [r.model_dump() for r in records[:limit]], "total": len(records)}


@app.get("/manifest/summary", response_model=ManifestSummary)
def get_manifest_summary(ws: Workspace = Depends(get_workspace)):
    try:
        frame = manifest_frame(ws.records())
    except InsMixError as e:
        raise to_http(e)
    return ManifestSummary(
        samples=len(frame),
        inputs=int(frame["input_id"].nunique()),
        placements=int(frame["placements"].sum()),
        target_placements=int(frame["target_count"].sum()),
        shortfall=int(frame["shortfall"].sum()),
        shuffled_cells=int(frame["shuffled_cells"].sum()),
        smoothed=int(frame["smoothing_applied"].sum()),
    )


@app.get("/metrics/training")
def get_training_metrics(
    window: int = Query(100, ge=1, le=10000),
    every: int = Query(1, ge=1),
    ws: Workspace = Depends(get_workspace),
):
    try:
        df = ws.metrics(window)
    except InsMixError as e:
        raise to_http(e)
    return {"metrics": frame_to_rows(df.iloc[::every]), "steps": int(len(df))}


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(app, host="0.0.0.0", port=8000)
