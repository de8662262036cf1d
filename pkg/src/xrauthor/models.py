"""Domain types shared across the pipeline: requests, specs, verdicts, tutor packs.

Everything here is a plain pydantic model so the same definitions serve as
validation for agent output, wire format for the HTTP API, and the on-disk
shape of persisted jobs and bundles.
"""
from __future__ import annotations

import enum
from datetime import datetime
from typing import Any
from urllib.parse import urlsplit

import pydantic
from pydantic import BaseModel, Field, StrictBool, field_validator, model_validator

from .errors import ValidationError


class GradeBand(str, enum.Enum):
    K_2 = "K-2"
    G3_5 = "3-5"
    G6_8 = "6-8"
    G9_12 = "9-12"


class AuthoringRequest(BaseModel):
    """A teacher's raw intent, as collected by the form or the CLI."""

    prompt_text: str
    grade_band: GradeBand
    subject: str = ""
    topic: str = ""
    require_approval: bool = True
    max_safety_attempts: int = Field(default=3, ge=1)

    @field_validator("prompt_text")
    @classmethod
    def _prompt_not_blank(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("prompt_text must be non-empty after trimming whitespace")
        return v


class ContentSpec(BaseModel):
    """Structured reformulation of a request into a generation-ready brief."""

    core_concept: str = Field(min_length=1)
    grade_band: GradeBand
    learning_objectives: list[str] = Field(min_length=1, max_length=6)
    required_visual_features: list[str] = Field(min_length=1, max_length=12)
    complexity_notes: str = ""
    refined_prompt: str = Field(min_length=1)
    labeling_requirements: list[str] = Field(default_factory=list, max_length=12)

    @model_validator(mode="after")
    def _prompt_mentions_features(self) -> "ContentSpec":
        prompt = self.refined_prompt.casefold()
        missing = [f for f in self.required_visual_features if f.casefold() not in prompt]
        if missing:
            raise ValueError(
                "refined_prompt must mention every required visual feature; "
                f"missing: {missing}"
            )
        return self


class CriterionKey(str, enum.Enum):
    AGE_APPROPRIATENESS = "age_appropriateness"
    FACTUAL_ACCURACY = "factual_accuracy"
    NO_DISTURBING_IMAGERY = "no_disturbing_imagery"
    NO_BIAS = "no_bias"
    EDUCATIONAL_VALUE = "educational_value"


CRITERION_ORDER: tuple[CriterionKey, ...] = (
    CriterionKey.AGE_APPROPRIATENESS,
    CriterionKey.FACTUAL_ACCURACY,
    CriterionKey.NO_DISTURBING_IMAGERY,
    CriterionKey.NO_BIAS,
    CriterionKey.EDUCATIONAL_VALUE,
)


class CriterionResult(BaseModel):
    key: CriterionKey
    # Strict: a reviewer reply saying "yes" where a boolean belongs is a
    # schema violation to repair, not something to coerce.
    passed: StrictBool
    rationale: str = Field(min_length=1)


class ReviewedInputs(str, enum.Enum):
    TEXT_ONLY = "text_only"
    TEXT_AND_IMAGE = "text_and_image"


class SafetyVerdict(BaseModel):
    """Per-criterion review results plus the overall decision."""

    criteria: list[CriterionResult]
    approved: StrictBool
    revision_feedback: str = ""
    reviewed_inputs: ReviewedInputs = ReviewedInputs.TEXT_ONLY

    @model_validator(mode="after")
    def _consistent(self) -> "SafetyVerdict":
        keys = [c.key for c in self.criteria]
        if sorted(keys, key=list(CRITERION_ORDER).index) != list(CRITERION_ORDER) or len(
            keys
        ) != len(set(keys)):
            raise ValueError(
                "criteria must contain each of the five review dimensions exactly once; "
                f"got: {[k.value for k in keys]}"
            )
        # Canonical order keeps serialized verdicts deterministic.
        self.criteria = sorted(self.criteria, key=lambda c: CRITERION_ORDER.index(c.key))
        all_pass = all(c.passed for c in self.criteria)
        if self.approved != all_pass:
            raise ValueError("approved must be true exactly when every criterion passed")
        if self.approved and self.revision_feedback.strip():
            raise ValueError("revision_feedback must be empty on an approved verdict")
        if not self.approved and not self.revision_feedback.strip():
            raise ValueError("revision_feedback must be non-empty on a rejected verdict")
        return self

    def failing(self) -> list[CriterionResult]:
        return [c for c in self.criteria if not c.passed]


def _well_formed_url(url: str) -> bool:
    parts = urlsplit(url)
    return bool(parts.scheme) and bool(parts.netloc)


class Annotation(BaseModel):
    """A note pinned to the model. The anchor is normalized to the asset's
    bounding box ([0,1] on each axis); None means it renders unanchored."""

    label: str = Field(min_length=1)
    body: str = ""
    anchor: tuple[float, float, float] | None = None

    @field_validator("anchor", mode="before")
    @classmethod
    def _accept_unanchored(cls, v: Any) -> Any:
        if isinstance(v, str):
            if v.strip().lower() == "unanchored":
                return None
            raise ValueError('anchor must be [x, y, z] or "unanchored"')
        return v

    @field_validator("anchor")
    @classmethod
    def _unit_range(cls, v: tuple[float, float, float] | None):
        if v is not None and not all(0.0 <= c <= 1.0 for c in v):
            raise ValueError("anchor coordinates must lie in [0, 1]")
        return v


class VocabEntry(BaseModel):
    term: str = Field(min_length=1)
    definition: str = Field(min_length=1)


class QuizQuestion(BaseModel):
    stem: str = Field(min_length=1)
    choices: list[str] = Field(min_length=2, max_length=5)
    correct_index: int
    explanation: str = ""

    @model_validator(mode="after")
    def _index_and_distinct(self) -> "QuizQuestion":
        if not 0 <= self.correct_index < len(self.choices):
            raise ValueError(
                f"correct_index {self.correct_index} out of range for "
                f"{len(self.choices)} choices"
            )
        if len(set(self.choices)) != len(self.choices):
            raise ValueError("choices must be pairwise distinct")
        return self


class Reading(BaseModel):
    title: str
    url: str
    snippet: str = ""

    @field_validator("url")
    @classmethod
    def _url(cls, v: str) -> str:
        if not _well_formed_url(v):
            raise ValueError(f"reading url must have a scheme and host: {v!r}")
        return v


class TutorPack(BaseModel):
    """Instructional scaffolds attached to a generated asset."""

    overview: str = ""
    annotations: list[Annotation] = Field(min_length=1, max_length=20)
    vocabulary: list[VocabEntry] = Field(min_length=1, max_length=20)
    quiz: list[QuizQuestion] = Field(min_length=1, max_length=10)
    readings: list[Reading] = Field(default_factory=list, max_length=10)


class AssetSource(str, enum.Enum):
    GENERATED = "generated"
    IMPORTED = "imported"


class BoundingBox(BaseModel):
    min: tuple[float, float, float]
    max: tuple[float, float, float]

    @model_validator(mode="after")
    def _ordered(self) -> "BoundingBox":
        if any(lo > hi for lo, hi in zip(self.min, self.max)):
            raise ValueError("bounding box min must be <= max on every axis")
        return self


class AssetMeta(BaseModel):
    """Summary of a validated binary glTF asset."""

    byte_length: int = Field(gt=20)
    gltf_version: int
    mesh_count: int = Field(ge=1)
    triangle_count: int = Field(ge=0)
    bounding_box: BoundingBox
    source: AssetSource = AssetSource.GENERATED
    sha256: str = Field(pattern=r"^[0-9a-f]{64}$")

    @field_validator("gltf_version")
    @classmethod
    def _v2(cls, v: int) -> int:
        if v != 2:
            raise ValueError(f"only binary glTF version 2 is supported, got {v}")
        return v


def validate_model(model_cls: type[BaseModel], data: Any) -> Any:
    """Build ``model_cls`` from raw data, raising this package's
    ValidationError (with readable field messages) instead of pydantic's."""
    try:
        return model_cls.model_validate(data)
    except pydantic.ValidationError as exc:
        msgs = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        )
        raise ValidationError(f"invalid {model_cls.__name__}: {msgs}") from exc


def utcnow_iso(dt: datetime) -> str:
    return dt.isoformat().replace("+00:00", "Z")
