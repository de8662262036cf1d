"""Sequencing of the four agent stages over one job.

Each ``run_stage`` call executes exactly the stage implied by the job's
current state, appends events, persists, and leaves the job in its successor
state. Decision logic (what happens after a review, how a rejection reshapes
the next generation prompt) lives in pure functions here so it can be tested
without any providers.
"""
from __future__ import annotations

import enum
import logging
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..agents import enrich, interpret, review
from ..bundle import BundleError, GlbError, validate_glb, write_bundle
from ..errors import (
    IllegalState,
    InvalidArgument,
    MalformedOutput,
    ProviderError,
    StorageError,
    ValidationError,
)
from ..idclock import IdClock
from ..models import AuthoringRequest, ContentSpec, SafetyVerdict, validate_model
from ..providers.types import ChatParams, ChatProvider, GenerationProvider, SearchProvider
from .job import EventKind, JobEvent, PipelineJob
from .states import FailureReason, JobState, TERMINAL_STATES, WORK_STAGES
from .store import FileJobStore

logger = logging.getLogger(__name__)

REDACTED = "[redacted]"


@dataclass
class StageDependencies:
    chat: ChatProvider
    generation: GenerationProvider
    search: SearchProvider
    store: FileJobStore
    clock: IdClock
    poll_interval: float = 2.0
    poll_deadline: float = 600.0
    chat_params: ChatParams = field(default_factory=ChatParams)
    secrets: tuple[str, ...] = ()
    cancel: Optional[threading.Event] = None
    on_event: Optional[Callable[[JobEvent], None]] = None


class NextAction(enum.Enum):
    ENRICH = "enrich"
    REGENERATE = "regenerate"
    ABORT = "abort"


class ApprovalDecision(str, enum.Enum):
    APPROVE = "approve"
    REJECT = "reject"


# ── pure decision functions ────────────────────────────────────────────


def decide_after_review(
    verdict: SafetyVerdict, attempt: int, max_attempts: int
) -> NextAction:
    """What the pipeline does after a completed review. Pure."""
    if not 1 <= attempt <= max_attempts:
        raise InvalidArgument(f"attempt {attempt} outside 1..{max_attempts}")
    if verdict.approved:
        return NextAction.ENRICH
    return NextAction.REGENERATE if attempt < max_attempts else NextAction.ABORT


def build_revision_prompt(spec: ContentSpec, verdict: SafetyVerdict) -> str:
    """Rewrite the generation prompt after a rejection. Pure and deterministic.

    The result keeps the incoming prompt (so guidance accumulates across
    attempts and consecutive prompts always differ), restates every required
    visual feature verbatim, and adds one corrective clause per failing
    criterion from the reviewer's feedback.
    """
    if verdict.approved:
        raise InvalidArgument("revision prompts exist only for rejected verdicts")
    lines = [spec.refined_prompt, "", "Keep all of these required visual features:"]
    lines.extend(f"- {feature}" for feature in spec.required_visual_features)
    lines.append("")
    lines.append("Revise to address this safety feedback from the previous attempt:")
    lines.extend(f"- {c.key.value}: {c.rationale}" for c in verdict.failing())
    if verdict.revision_feedback.strip():
        lines.append(f"- Overall guidance: {verdict.revision_feedback}")
    return "\n".join(lines)


def count_stage_executions(events: list[JobEvent]) -> int:
    """Completed work stages (interpret/generate/review/enrich) in a run."""
    return sum(
        1
        for e in events
        if e.kind == EventKind.STAGE_COMPLETED and e.stage in WORK_STAGES
    )


# ── event plumbing ─────────────────────────────────────────────────────


def _redact(detail: str, secrets: tuple[str, ...]) -> str:
    for secret in secrets:
        if secret:
            detail = detail.replace(secret, REDACTED)
    return detail


def _record(
    job: PipelineJob,
    deps: StageDependencies,
    kind: EventKind,
    detail: str = "",
    stage: Optional[JobState] = None,
) -> None:
    now = deps.clock.now()
    if job.events and now < job.events[-1].timestamp:
        now = job.events[-1].timestamp
    event = JobEvent(
        timestamp=now,
        stage=stage if stage is not None else job.state,
        kind=kind,
        detail=_redact(detail, deps.secrets),
    )
    deps.store.append_event(job.job_id, event)
    job.events.append(event)
    job.updated_at = event.timestamp
    if deps.on_event is not None:
        deps.on_event(event)


def _advance(job: PipelineJob, deps: StageDependencies, dst: JobState, detail: str = "") -> None:
    _record(job, deps, EventKind.STAGE_COMPLETED, detail)
    job.state = dst
    _record(job, deps, EventKind.STAGE_ENTERED, stage=dst)


def _fail(
    job: PipelineJob,
    deps: StageDependencies,
    reason: FailureReason,
    detail: str,
    *,
    stage_completed: bool = False,
    error_event: bool = True,
) -> PipelineJob:
    if stage_completed:
        _record(job, deps, EventKind.STAGE_COMPLETED, detail)
    if error_event:
        _record(job, deps, EventKind.ERROR, detail)
    job.state = JobState.FAILED
    job.failure_reason = reason
    _record(job, deps, EventKind.STAGE_ENTERED, detail, stage=JobState.FAILED)
    return deps.store.save(job)


# ── operations ─────────────────────────────────────────────────────────


def submit(request: AuthoringRequest, store: FileJobStore, clock: IdClock) -> str:
    """Persist a new job in the received state and return its id."""
    request = validate_model(AuthoringRequest, request.model_dump())
    job_id = clock.new_job_id()
    now = clock.now()
    job = PipelineJob(
        job_id=job_id, request=request, created_at=now, updated_at=now
    )
    store.create(job)
    store.append_event(
        job_id,
        JobEvent(timestamp=now, stage=JobState.RECEIVED, kind=EventKind.STAGE_ENTERED),
    )
    logger.info("job %s submitted (%s / %s)", job_id, request.grade_band.value, request.subject)
    return job_id


def run_stage(job: PipelineJob, deps: StageDependencies) -> PipelineJob:
    """Execute the single stage implied by the job's state and persist the
    result. Provider failures move the job to failed rather than raising."""
    if job.state in TERMINAL_STATES:
        raise IllegalState(f"job {job.job_id} is terminal ({job.state.value})")
    if job.state == JobState.AWAITING_APPROVAL:
        raise IllegalState(
            f"job {job.job_id} is waiting for teacher approval; use resolve_approval"
        )
    handler = _STAGE_HANDLERS[job.state]
    with deps.store.lock(job.job_id):
        try:
            return handler(job, deps)
        except (ProviderError, MalformedOutput, GlbError, BundleError, StorageError) as exc:
            logger.warning("job %s failed in %s: %s", job.job_id, job.state.value, exc)
            return _fail(
                job,
                deps,
                FailureReason.PROVIDER_ERROR,
                f"{type(exc).__name__}: {exc}",
            )


def run_to_completion(job: PipelineJob, deps: StageDependencies) -> PipelineJob:
    """Advance until the job is terminal or pauses for approval."""
    while job.state not in TERMINAL_STATES and job.state != JobState.AWAITING_APPROVAL:
        job = run_stage(job, deps)
    return job


def resolve_approval(
    job: PipelineJob,
    decision: ApprovalDecision,
    deps: StageDependencies,
    edited_spec: Optional[ContentSpec] = None,
) -> PipelineJob:
    """Apply the teacher's approval-gate decision."""
    if job.state != JobState.AWAITING_APPROVAL:
        raise IllegalState(
            f"job {job.job_id} is in {job.state.value}, not awaiting approval"
        )
    with deps.store.lock(job.job_id):
        if decision == ApprovalDecision.REJECT:
            return _fail(
                job,
                deps,
                FailureReason.TEACHER_REJECTED,
                "teacher rejected the interpretation",
                stage_completed=True,
                error_event=False,
            )
        if edited_spec is not None:
            edited_spec = validate_model(ContentSpec, edited_spec.model_dump())
            job.spec = edited_spec
            job.generation_prompt = edited_spec.refined_prompt
            detail = "teacher approved with an edited spec"
        else:
            detail = "teacher approved"
        _advance(job, deps, JobState.GENERATING, detail)
        return deps.store.save(job)


# ── stage handlers ─────────────────────────────────────────────────────


def _stage_received(job: PipelineJob, deps: StageDependencies) -> PipelineJob:
    # Intake has no agent work; it only enters the interpretation stage.
    _advance(job, deps, JobState.INTERPRETING)
    return deps.store.save(job)


def _stage_interpreting(job: PipelineJob, deps: StageDependencies) -> PipelineJob:
    _record(job, deps, EventKind.PROVIDER_CALL, "chat: pedagogical interpretation")
    spec = interpret(job.request, deps.chat, params=deps.chat_params)
    job.spec = spec
    job.generation_prompt = spec.refined_prompt
    if job.request.require_approval:
        _advance(job, deps, JobState.AWAITING_APPROVAL, f"concept: {spec.core_concept}")
    else:
        _advance(job, deps, JobState.GENERATING, f"concept: {spec.core_concept}")
    return deps.store.save(job)


def _stage_generating(job: PipelineJob, deps: StageDependencies) -> PipelineJob:
    if job.generation_prompt is None:
        raise IllegalState(f"job {job.job_id} has no generation prompt")
    task_id = deps.generation.start_generation(job.generation_prompt)
    _record(job, deps, EventKind.PROVIDER_CALL, f"generation task {task_id} created")

    def on_poll(task) -> None:
        _record(
            job,
            deps,
            EventKind.PROVIDER_CALL,
            f"generation poll: {task.status.value} ({task.progress}%)",
        )

    task = deps.generation.poll_generation(
        task_id, deps.poll_interval, deps.poll_deadline, on_poll=on_poll, cancel=deps.cancel
    )
    if task.model_url is None:
        raise ProviderError(f"generation failed: {task.failure_reason or 'no model url'}")
    data = deps.generation.fetch_asset(task.model_url)
    try:
        meta = validate_glb(data)
    except GlbError as exc:
        raise ProviderError(f"generated asset is not a valid GLB: {exc}") from exc
    job.asset = meta
    job.asset_file = deps.store.write_asset(
        job.job_id, f"attempt-{job.attempt}.glb", data
    )
    job.preview_image_url = task.preview_image_url
    _advance(
        job,
        deps,
        JobState.REVIEWING,
        f"asset: {meta.mesh_count} mesh(es), {meta.triangle_count} triangles",
    )
    return deps.store.save(job)


def _stage_reviewing(job: PipelineJob, deps: StageDependencies) -> PipelineJob:
    if job.spec is None or job.generation_prompt is None:
        raise IllegalState(f"job {job.job_id} reached review without a spec")
    # Review what was actually generated: the current working prompt.
    working = job.spec.model_copy(update={"refined_prompt": job.generation_prompt})
    _record(job, deps, EventKind.PROVIDER_CALL, "chat: safety review")
    verdict = review(working, job.preview_image_url, deps.chat, params=deps.chat_params)
    job.verdict_history = [*job.verdict_history, verdict]
    action = decide_after_review(
        verdict, job.attempt, job.request.max_safety_attempts
    )
    if action == NextAction.ENRICH:
        _advance(job, deps, JobState.ENRICHING, "review approved")
    elif action == NextAction.REGENERATE:
        failing = ", ".join(c.key.value for c in verdict.failing())
        _advance(job, deps, JobState.REVISING, f"review rejected ({failing})")
    else:
        return _fail(
            job,
            deps,
            FailureReason.SAFETY_EXHAUSTED,
            f"review rejected on final attempt {job.attempt} of "
            f"{job.request.max_safety_attempts}",
            stage_completed=True,
        )
    return deps.store.save(job)


def _stage_revising(job: PipelineJob, deps: StageDependencies) -> PipelineJob:
    if job.spec is None or job.generation_prompt is None or not job.verdict_history:
        raise IllegalState(f"job {job.job_id} reached revision without a rejection")
    working = job.spec.model_copy(update={"refined_prompt": job.generation_prompt})
    job.generation_prompt = build_revision_prompt(working, job.verdict_history[-1])
    job.attempt += 1
    _advance(job, deps, JobState.GENERATING, f"attempt {job.attempt} prompt prepared")
    return deps.store.save(job)


def _stage_enriching(job: PipelineJob, deps: StageDependencies) -> PipelineJob:
    if job.spec is None or job.asset is None or job.asset_file is None:
        raise IllegalState(f"job {job.job_id} reached enrichment incomplete")
    _record(job, deps, EventKind.PROVIDER_CALL, "search + chat: tutor enrichment")
    pack = enrich(
        job.spec,
        job.asset,
        deps.search,
        deps.chat,
        on_warning=lambda msg: _record(job, deps, EventKind.WARNING, msg),
        params=deps.chat_params,
    )
    job.tutor_pack = pack
    asset_bytes = deps.store.read_asset(job.job_id, job.asset_file)
    bundle_dir = deps.store.bundle_dir(job.job_id)
    write_bundle(
        bundle_dir,
        bundle_id=job.job_id,
        request=job.request,
        spec=job.spec,
        verdicts=job.verdict_history,
        tutor_pack=pack,
        asset=job.asset,
        asset_bytes=asset_bytes,
        created_at=deps.clock.now(),
    )
    job.bundle_dir = "bundle"
    _advance(job, deps, JobState.COMPLETE, "bundle written")
    return deps.store.save(job)


_STAGE_HANDLERS = {
    JobState.RECEIVED: _stage_received,
    JobState.INTERPRETING: _stage_interpreting,
    JobState.GENERATING: _stage_generating,
    JobState.REVIEWING: _stage_reviewing,
    JobState.REVISING: _stage_revising,
    JobState.ENRICHING: _stage_enriching,
}
