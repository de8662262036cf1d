"""The persisted job record and its append-only event log entries."""
from __future__ import annotations

import enum
from datetime import datetime
from typing import Optional

from pydantic import BaseModel, Field, model_validator

from ..models import AssetMeta, AuthoringRequest, ContentSpec, SafetyVerdict, TutorPack
from .states import JobState, FailureReason, TERMINAL_STATES


class EventKind(str, enum.Enum):
    STAGE_ENTERED = "stage_entered"
    STAGE_COMPLETED = "stage_completed"
    PROVIDER_CALL = "provider_call"
    WARNING = "warning"
    ERROR = "error"


class JobEvent(BaseModel):
    timestamp: datetime
    stage: JobState
    kind: EventKind
    detail: str = ""


class PipelineJob(BaseModel):
    """Everything a run accumulates. The event log is persisted separately
    (append-only JSON lines) and carried here for convenience."""

    job_id: str
    version: int = 0
    request: AuthoringRequest
    state: JobState = JobState.RECEIVED
    failure_reason: Optional[FailureReason] = None
    attempt: int = 1
    spec: Optional[ContentSpec] = None
    generation_prompt: Optional[str] = None
    asset: Optional[AssetMeta] = None
    asset_file: Optional[str] = None
    preview_image_url: Optional[str] = None
    verdict_history: list[SafetyVerdict] = Field(default_factory=list)
    tutor_pack: Optional[TutorPack] = None
    bundle_dir: Optional[str] = None
    created_at: datetime
    updated_at: datetime
    events: list[JobEvent] = Field(default_factory=list, exclude=True)

    @model_validator(mode="after")
    def _invariants(self) -> "PipelineJob":
        if not 1 <= self.attempt <= self.request.max_safety_attempts:
            raise ValueError(
                f"attempt {self.attempt} outside 1..{self.request.max_safety_attempts}"
            )
        if self.state == JobState.FAILED and self.failure_reason is None:
            raise ValueError("a failed job must record its failure reason")
        if self.state != JobState.FAILED and self.failure_reason is not None:
            raise ValueError("failure_reason is only valid in the failed state")
        if self.state == JobState.COMPLETE:
            if self.spec is None or self.asset is None or self.tutor_pack is None:
                raise ValueError("a complete job must carry spec, asset, and tutor pack")
            if not self.verdict_history or not self.verdict_history[-1].approved:
                raise ValueError("a complete job must end on an approved verdict")
        return self

    @property
    def terminal(self) -> bool:
        return self.state in TERMINAL_STATES
