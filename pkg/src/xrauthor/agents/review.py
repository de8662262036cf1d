"""Safeguard agent: reviews a content brief (and preview image, when
available) against the five K-12 safety dimensions."""
from __future__ import annotations

from typing import Optional

from ..models import ContentSpec, ReviewedInputs, SafetyVerdict
from ..prompts import system_prompt
from ..providers.types import ChatParams, ChatProvider
from .structured import parse_as, request_structured


def render_review_input(spec: ContentSpec, include_image: bool) -> str:
    lines = [
        "Review the following educational 3D content for K-12 classroom use.",
        "",
        f"Core concept: {spec.core_concept}",
        f"Grade band: {spec.grade_band.value}",
        "Learning objectives:",
        *[f"- {o}" for o in spec.learning_objectives],
        "Required visual features:",
        *[f"- {f}" for f in spec.required_visual_features],
        f"Complexity notes: {spec.complexity_notes or '(none)'}",
        "Generation prompt used for this attempt:",
        spec.refined_prompt,
        "",
    ]
    if include_image:
        lines.append("A rendered preview image of the generated model is attached.")
    else:
        lines.append(
            "No preview image is available for this attempt; review the text alone."
        )
    return "\n".join(lines)


def review(
    spec: ContentSpec,
    preview: Optional[str],
    chat: ChatProvider,
    *,
    params: Optional[ChatParams] = None,
) -> SafetyVerdict:
    """Produce a SafetyVerdict with exactly the five canonical criteria.

    The preview image is attached only when the chat provider supports image
    input; reviewed_inputs records what the reviewer actually saw.
    """
    include_image = preview is not None and getattr(chat, "supports_images", False)
    verdict = request_structured(
        chat,
        system_prompt("safeguard"),
        render_review_input(spec, include_image),
        lambda data: parse_as(SafetyVerdict, data),
        image_ref=preview if include_image else None,
        params=params,
    )
    seen = ReviewedInputs.TEXT_AND_IMAGE if include_image else ReviewedInputs.TEXT_ONLY
    return verdict.model_copy(update={"reviewed_inputs": seen})
