"""HTTP facade over the pipeline: job submission, progress streaming,
approval actions, and bundle serving.

Jobs execute on an in-process worker pool; every mutation funnels through the
engine's per-job locking, and the event stream is a fan-out read of the
append-only log, emitted as one JSON object per line.
"""
from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Iterator, Optional

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from ..errors import (
    IllegalState,
    StorageError,
    UnknownJob,
    ValidationError,
    XrAuthorError,
)
from ..idclock import IdClock, SystemIdClock
from ..models import (
    AuthoringRequest,
    ContentSpec,
    SafetyVerdict,
    TutorPack,
    validate_model,
)
from ..pipeline import (
    ApprovalDecision,
    EventKind,
    FailureReason,
    FileJobStore,
    JobEvent,
    JobState,
    PipelineJob,
    StageDependencies,
    TERMINAL_STATES,
    resolve_approval,
    run_to_completion,
    submit,
)
from ..providers import ProviderConfig, build_providers

logger = logging.getLogger(__name__)

EVENT_TAIL = 50
STREAM_POLL_S = 0.05
STREAM_MAX_S = 600.0

CONTENT_TYPES = {
    "manifest.json": "application/json",
    "tutor.json": "application/json",
    "model.glb": "model/gltf-binary",
}


class JobView(BaseModel):
    job_id: str
    state: JobState
    failure_reason: Optional[FailureReason] = None
    attempt: int
    require_approval: bool
    spec: Optional[ContentSpec] = None
    latest_verdict: Optional[SafetyVerdict] = None
    verdicts: list[SafetyVerdict] = []
    tutor_pack: Optional[TutorPack] = None
    bundle_url: Optional[str] = None
    events: list[JobEvent] = []
    total_events: int = 0


class ApprovalBody(BaseModel):
    decision: ApprovalDecision
    edited_spec: Optional[dict] = None


def _job_view(job: PipelineJob) -> JobView:
    events = job.events
    return JobView(
        job_id=job.job_id,
        state=job.state,
        failure_reason=job.failure_reason,
        attempt=job.attempt,
        require_approval=job.request.require_approval,
        spec=job.spec,
        latest_verdict=job.verdict_history[-1] if job.verdict_history else None,
        verdicts=job.verdict_history,
        tutor_pack=job.tutor_pack,
        bundle_url=f"/api/bundles/{job.job_id}" if job.state == JobState.COMPLETE else None,
        events=events[-EVENT_TAIL:],
        total_events=len(events),
    )


def create_app(
    *,
    data_dir: Path,
    provider_config: Optional[ProviderConfig] = None,
    max_jobs: int = 2,
    cors_origins: Optional[list[str]] = None,
    ui_dir: Optional[Path] = None,
    clock: Optional[IdClock] = None,
) -> FastAPI:
    config = provider_config or ProviderConfig.from_env()
    providers = build_providers(config)
    store = FileJobStore(Path(data_dir))
    clock = clock or SystemIdClock()
    mock = config.mode == "mock"
    deps = StageDependencies(
        chat=providers.chat,
        generation=providers.generation,
        search=providers.search,
        store=store,
        clock=clock,
        poll_interval=0.001 if mock else 2.0,
        poll_deadline=30.0 if mock else 600.0,
        secrets=config.secret_values(),
    )
    executor = ThreadPoolExecutor(max_workers=max_jobs, thread_name_prefix="pipeline")

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        executor.shutdown(wait=False, cancel_futures=True)

    app = FastAPI(title="xrauthor", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def drive(job_id: str) -> None:
        try:
            job = store.load(job_id)
            if job.state not in TERMINAL_STATES and job.state != JobState.AWAITING_APPROVAL:
                run_to_completion(job, deps)
        except Exception:  # worker thread: log, never crash the pool
            logger.exception("background execution of %s failed", job_id)

    @app.exception_handler(RequestValidationError)
    async def on_invalid_body(_: Request, exc: RequestValidationError):
        detail = [
            {"field": ".".join(str(p) for p in err["loc"] if p != "body"), "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.post("/api/jobs", status_code=201)
    def create_job(request: AuthoringRequest):
        try:
            job_id = submit(request, store, clock)
        except ValidationError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        except StorageError as exc:
            return JSONResponse(status_code=503, content={"detail": str(exc)})
        executor.submit(drive, job_id)
        return {"job_id": job_id}

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str) -> JobView:
        try:
            return _job_view(store.load(job_id))
        except UnknownJob:
            raise _http404(f"no job {job_id}")

    @app.get("/api/jobs/{job_id}/events")
    def stream_events(job_id: str, offset: int = 0):
        if not store.exists(job_id):
            raise _http404(f"no job {job_id}")

        def generate() -> Iterator[str]:
            position = max(offset, 0)
            give_up_at = time.monotonic() + STREAM_MAX_S
            while True:
                fresh = store.read_events(job_id, position)
                for event in fresh:
                    position += 1
                    yield json.dumps(event.model_dump(mode="json")) + "\n"
                    if event.kind == EventKind.STAGE_ENTERED and event.stage in TERMINAL_STATES:
                        return
                if not fresh and store.load(job_id).terminal:
                    return  # subscribed past the end of a finished run
                if time.monotonic() > give_up_at:
                    return
                time.sleep(STREAM_POLL_S)

        return StreamingResponse(generate(), media_type="application/x-ndjson")

    @app.post("/api/jobs/{job_id}/approval")
    def post_approval(job_id: str, body: ApprovalBody) -> JobView:
        try:
            job = store.load(job_id)
        except UnknownJob:
            raise _http404(f"no job {job_id}")
        edited: Optional[ContentSpec] = None
        if body.edited_spec is not None:
            try:
                edited = validate_model(ContentSpec, body.edited_spec)
            except ValidationError as exc:
                raise _http(400, str(exc))
        try:
            job = resolve_approval(job, body.decision, deps, edited_spec=edited)
        except IllegalState as exc:
            raise _http(409, str(exc))
        if job.state == JobState.GENERATING:
            executor.submit(drive, job_id)
        return _job_view(job)

    @app.get("/api/bundles/{job_id}/{filename:path}")
    def get_bundle_file(job_id: str, filename: str, request: Request):
        if "/" in filename or "\\" in filename or ".." in filename or filename.startswith("."):
            raise _http(403, "path traversal is not allowed")
        if filename not in CONTENT_TYPES:
            raise _http404(f"bundle files are limited to {sorted(CONTENT_TYPES)}")
        path = store.bundle_dir(job_id) / filename
        if not path.is_file():
            raise _http404(f"no {filename} for job {job_id}")
        data = path.read_bytes()
        media = CONTENT_TYPES[filename]
        range_header = request.headers.get("range")
        if range_header and filename == "model.glb":
            sliced = _slice_range(data, range_header)
            if sliced is not None:
                start, end, chunk = sliced
                return Response(
                    content=chunk,
                    status_code=206,
                    media_type=media,
                    headers={
                        "Content-Range": f"bytes {start}-{end}/{len(data)}",
                        "Accept-Ranges": "bytes",
                    },
                )
        headers = {"Accept-Ranges": "bytes"} if filename == "model.glb" else {}
        return Response(content=data, media_type=media, headers=headers)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _slice_range(data: bytes, header: str) -> Optional[tuple[int, int, bytes]]:
    """Parse a single-range ``bytes=`` header; None falls back to a full 200."""
    try:
        unit, _, spec = header.partition("=")
        if unit.strip().lower() != "bytes" or "," in spec:
            return None
        start_s, _, end_s = spec.strip().partition("-")
        if start_s == "" and end_s:  # suffix: last N bytes
            length = min(int(end_s), len(data))
            start, end = len(data) - length, len(data) - 1
        else:
            start = int(start_s)
            end = int(end_s) if end_s else len(data) - 1
        end = min(end, len(data) - 1)
        if start < 0 or start > end:
            return None
        return start, end, data[start : end + 1]
    except ValueError:
        return None


def _http(status: int, detail: str):
    from fastapi import HTTPException

    return HTTPException(status_code=status, detail=detail)


def _http404(detail: str):
    return _http(404, detail)


__all__ = ["ApprovalBody", "JobView", "create_app"]
