"""Job state machine, persistence, and the stage-sequencing engine."""

from .engine import (
    ApprovalDecision,
    NextAction,
    StageDependencies,
    build_revision_prompt,
    count_stage_executions,
    decide_after_review,
    resolve_approval,
    run_stage,
    run_to_completion,
    submit,
)
from .job import EventKind, JobEvent, PipelineJob
from .states import (
    FailureReason,
    JobState,
    TERMINAL_STATES,
    TRANSITIONS,
    WORK_STAGES,
    is_legal_path,
    is_legal_transition,
)
from .store import FileJobStore

__all__ = [
    "ApprovalDecision",
    "EventKind",
    "FailureReason",
    "FileJobStore",
    "JobEvent",
    "JobState",
    "NextAction",
    "PipelineJob",
    "StageDependencies",
    "TERMINAL_STATES",
    "TRANSITIONS",
    "WORK_STAGES",
    "build_revision_prompt",
    "count_stage_executions",
    "decide_after_review",
    "is_legal_path",
    "is_legal_transition",
    "resolve_approval",
    "run_stage",
    "run_to_completion",
    "submit",
]
