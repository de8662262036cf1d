"""Pedagogical agent: teacher request in, structured content brief out."""
from __future__ import annotations

from typing import Optional

from ..models import AuthoringRequest, ContentSpec
from ..prompts import system_prompt
from ..providers.types import ChatParams, ChatProvider
from .structured import parse_as, request_structured


def render_request(request: AuthoringRequest) -> str:
    return (
        f"Teacher request: {request.prompt_text}\n"
        f"Grade band: {request.grade_band.value}\n"
        f"Subject: {request.subject or '(not given)'}\n"
        f"Topic: {request.topic or '(not given)'}"
    )


def interpret(
    request: AuthoringRequest,
    chat: ChatProvider,
    *,
    params: Optional[ChatParams] = None,
) -> ContentSpec:
    """Turn the raw request into a validated ContentSpec, repairing malformed
    replies up to twice. Raises MalformedOutput when the budget runs out."""
    return request_structured(
        chat,
        system_prompt("pedagogical"),
        render_request(request),
        lambda data: parse_as(ContentSpec, data),
        params=params,
    )
