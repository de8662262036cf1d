"""Job state machine: states, failure reasons, and the legal transition table."""
from __future__ import annotations

import enum


class JobState(str, enum.Enum):
    RECEIVED = "received"
    INTERPRETING = "interpreting"
    AWAITING_APPROVAL = "awaiting_approval"
    GENERATING = "generating"
    REVIEWING = "reviewing"
    REVISING = "revising"
    ENRICHING = "enriching"
    COMPLETE = "complete"
    FAILED = "failed"


class FailureReason(str, enum.Enum):
    TEACHER_REJECTED = "teacher_rejected"
    SAFETY_EXHAUSTED = "safety_exhausted"
    PROVIDER_ERROR = "provider_error"


TERMINAL_STATES = frozenset({JobState.COMPLETE, JobState.FAILED})

# Stages that perform agent/provider work; entering or leaving the other
# states is bookkeeping. (Received is intake, Revising is a pure rewrite.)
WORK_STAGES = frozenset(
    {JobState.INTERPRETING, JobState.GENERATING, JobState.REVIEWING, JobState.ENRICHING}
)

# Any non-terminal state may additionally move to FAILED on an unrecoverable
# provider failure; that edge is included explicitly below.
TRANSITIONS: dict[JobState, frozenset[JobState]] = {
    JobState.RECEIVED: frozenset({JobState.INTERPRETING, JobState.FAILED}),
    JobState.INTERPRETING: frozenset(
        {JobState.AWAITING_APPROVAL, JobState.GENERATING, JobState.FAILED}
    ),
    JobState.AWAITING_APPROVAL: frozenset({JobState.GENERATING, JobState.FAILED}),
    JobState.GENERATING: frozenset({JobState.REVIEWING, JobState.FAILED}),
    JobState.REVIEWING: frozenset(
        {JobState.ENRICHING, JobState.REVISING, JobState.FAILED}
    ),
    JobState.REVISING: frozenset({JobState.GENERATING, JobState.FAILED}),
    JobState.ENRICHING: frozenset({JobState.COMPLETE, JobState.FAILED}),
    JobState.COMPLETE: frozenset(),
    JobState.FAILED: frozenset(),
}


def is_legal_transition(src: JobState, dst: JobState) -> bool:
    return dst in TRANSITIONS[src]


def is_legal_path(states: list[JobState]) -> bool:
    """True when consecutive states all follow the transition table."""
    return all(is_legal_transition(a, b) for a, b in zip(states, states[1:]))
