"""Finding JSON in model replies, and the bounded repair loop around it."""
from __future__ import annotations

import json
import logging
from typing import Callable, Optional, TypeVar

import pydantic

from ..errors import MalformedOutput, NoJsonFound
from ..providers.types import ChatMessage, ChatParams, ChatProvider, ChatRequest

logger = logging.getLogger(__name__)

T = TypeVar("T")

REPAIR_ROUNDS = 2

_decoder = json.JSONDecoder()


def extract_structured(raw: str) -> dict:
    """Return the first parseable JSON object in ``raw``.

    Surrounding prose and code fences are tolerated: the scan simply tries
    every '{' until one parses. Never raises on weird input, other than
    NoJsonFound.
    """
    idx = raw.find("{")
    while idx != -1:
        try:
            value, _ = _decoder.raw_decode(raw, idx)
        except ValueError:
            value = None
        if isinstance(value, dict):
            return value
        idx = raw.find("{", idx + 1)
    raise NoJsonFound("no JSON object found in model reply")


class SchemaMismatch(Exception):
    """Parsed JSON did not satisfy the target model; message lists the errors."""


def _validation_summary(exc: pydantic.ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
        for err in exc.errors()
    )


def parse_as(model_cls: type[T], data: dict) -> T:
    try:
        return model_cls.model_validate(data)  # type: ignore[attr-defined]
    except pydantic.ValidationError as exc:
        raise SchemaMismatch(_validation_summary(exc)) from exc


def request_structured(
    chat: ChatProvider,
    system: str,
    user_text: str,
    validate: Callable[[dict], T],
    *,
    image_ref: Optional[str] = None,
    params: Optional[ChatParams] = None,
    repair_rounds: int = REPAIR_ROUNDS,
) -> T:
    """Send one structured-output request, re-prompting with the validation
    errors up to ``repair_rounds`` times before giving up.

    Issues at most ``1 + repair_rounds`` chat calls.
    """
    params = params or ChatParams()
    messages = [ChatMessage(role="user", text=user_text, image_ref=image_ref)]
    failures: list[str] = []
    for _ in range(1 + repair_rounds):
        reply = chat.chat(ChatRequest(system=system, messages=messages, params=params))
        try:
            return validate(extract_structured(reply.text))
        except (NoJsonFound, SchemaMismatch) as exc:
            failures.append(str(exc))
            logger.debug("structured reply rejected: %s", exc)
            messages = messages + [
                ChatMessage(role="assistant", text=reply.text),
                ChatMessage(
                    role="user",
                    text=(
                        "Your previous reply was not valid. "
                        f"Problem: {exc}. "
                        "Reply again with a single JSON object that follows the "
                        "output format exactly, and nothing else."
                    ),
                ),
            ]
    raise MalformedOutput(
        f"model reply failed validation after {1 + repair_rounds} attempts: "
        + " | ".join(failures)
    )
