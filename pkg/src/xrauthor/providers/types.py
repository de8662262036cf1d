"""Provider-facing request/response types and the abstract client interfaces.

Modules outside this package talk to providers only through these types;
wire formats of the concrete services never leak out.
"""
from __future__ import annotations

import enum
import threading
from typing import Callable, Literal, Optional, Protocol, runtime_checkable
from urllib.parse import urlsplit

from pydantic import BaseModel, Field, field_validator, model_validator


class ChatMessage(BaseModel):
    role: Literal["user", "assistant"]
    text: str
    image_ref: Optional[str] = None


class ChatParams(BaseModel):
    max_tokens: int = Field(default=2048, gt=0)
    temperature: float = Field(default=0.2, ge=0.0, le=2.0)


class ChatRequest(BaseModel):
    system: str
    messages: list[ChatMessage] = Field(min_length=1)
    params: ChatParams = Field(default_factory=ChatParams)

    @model_validator(mode="after")
    def _alternating_roles(self) -> "ChatRequest":
        for i, msg in enumerate(self.messages):
            expected = "user" if i % 2 == 0 else "assistant"
            if msg.role != expected:
                raise ValueError(
                    "messages must alternate user/assistant starting with user; "
                    f"message {i} has role {msg.role!r}"
                )
        return self


class TokenUsage(BaseModel):
    input_tokens: int = 0
    output_tokens: int = 0


class ChatReply(BaseModel):
    text: str
    usage: TokenUsage = Field(default_factory=TokenUsage)


class GenerationStatus(str, enum.Enum):
    PENDING = "pending"
    IN_PROGRESS = "in_progress"
    SUCCEEDED = "succeeded"
    FAILED = "failed"


# Rank used to reject regressions (succeeded/failed are absorbing).
_STATUS_RANK = {
    GenerationStatus.PENDING: 0,
    GenerationStatus.IN_PROGRESS: 1,
    GenerationStatus.SUCCEEDED: 2,
    GenerationStatus.FAILED: 2,
}


def status_regressed(earlier: GenerationStatus, later: GenerationStatus) -> bool:
    if earlier in (GenerationStatus.SUCCEEDED, GenerationStatus.FAILED):
        return later != earlier
    return _STATUS_RANK[later] < _STATUS_RANK[earlier]


class GenerationTask(BaseModel):
    task_id: str
    status: GenerationStatus
    progress: int = Field(default=0, ge=0, le=100)
    model_url: Optional[str] = None
    preview_image_url: Optional[str] = None
    failure_reason: Optional[str] = None

    @model_validator(mode="after")
    def _url_iff_succeeded(self) -> "GenerationTask":
        if (self.status == GenerationStatus.SUCCEEDED) != (self.model_url is not None):
            raise ValueError("model_url must be present exactly when status is succeeded")
        return self


class SearchResult(BaseModel):
    title: str
    url: str
    snippet: str = ""
    score: float = Field(ge=0.0, le=1.0)

    @field_validator("url")
    @classmethod
    def _url(cls, v: str) -> str:
        parts = urlsplit(v)
        if not (parts.scheme and parts.netloc):
            raise ValueError(f"search result url must have a scheme and host: {v!r}")
        return v


PollCallback = Callable[[GenerationTask], None]


@runtime_checkable
class ChatProvider(Protocol):
    supports_images: bool

    def chat(self, request: ChatRequest) -> ChatReply: ...


@runtime_checkable
class GenerationProvider(Protocol):
    def start_generation(self, prompt: str) -> str: ...

    def poll_generation(
        self,
        task_id: str,
        poll_interval: float,
        deadline: float,
        on_poll: Optional[PollCallback] = None,
        cancel: Optional[threading.Event] = None,
    ) -> GenerationTask: ...

    def fetch_asset(self, model_url: str) -> bytes: ...


@runtime_checkable
class SearchProvider(Protocol):
    def search(self, query: str, k: int) -> list[SearchResult]: ...
