"""Tutor agent: search-grounded annotations, vocabulary, quiz, and readings."""
from __future__ import annotations

import logging
from typing import Callable, Optional

from ..errors import SearchError
from ..models import AssetMeta, ContentSpec, TutorPack
from ..prompts import system_prompt
from ..providers.types import ChatParams, ChatProvider, SearchProvider, SearchResult
from .structured import parse_as, request_structured

logger = logging.getLogger(__name__)

SEARCH_TOP_K = 5


def search_query(spec: ContentSpec) -> str:
    return f"{spec.core_concept} for grades {spec.grade_band.value}"


def render_enrich_input(
    spec: ContentSpec, asset: AssetMeta, results: list[SearchResult]
) -> str:
    lines = [
        f"Subject matter: {spec.core_concept} (grade band {spec.grade_band.value})",
        "Learning objectives:",
        *[f"- {o}" for o in spec.learning_objectives],
        "Visible structures on the 3D model:",
        *[f"- {f}" for f in spec.required_visual_features],
    ]
    if spec.labeling_requirements:
        lines.append("Labeling hints from the lesson brief:")
        lines.extend(f"- {hint}" for hint in spec.labeling_requirements)
    lines.append(
        f"The model has {asset.mesh_count} mesh(es) and about "
        f"{asset.triangle_count} triangles."
    )
    if results:
        lines.append("")
        lines.append("Web search results (readings may only use these):")
        for i, r in enumerate(results, start=1):
            lines.append(f"{i}. {r.title} — {r.url}")
            if r.snippet:
                lines.append(f"   {r.snippet}")
    else:
        lines.append("")
        lines.append("No web search results are available; return an empty readings list.")
    return "\n".join(lines)


def enrich(
    spec: ContentSpec,
    asset: AssetMeta,
    search: SearchProvider,
    chat: ChatProvider,
    *,
    on_warning: Optional[Callable[[str], None]] = None,
    k: int = SEARCH_TOP_K,
    params: Optional[ChatParams] = None,
) -> TutorPack:
    """Build a TutorPack grounded in one web search.

    A failing search degrades to an empty readings list rather than failing
    the stage; readings the model invents outside the search results are
    dropped so their urls are always a subset of what the search returned.
    """

    def warn(message: str) -> None:
        logger.warning("%s", message)
        if on_warning is not None:
            on_warning(message)

    query = search_query(spec)
    try:
        results = search.search(query, k)
    except SearchError as exc:
        warn(f"web search failed, continuing without readings: {exc}")
        results = []

    pack = request_structured(
        chat,
        system_prompt("tutor"),
        render_enrich_input(spec, asset, results),
        lambda data: parse_as(TutorPack, data),
        params=params,
    )
    allowed = {r.url for r in results}
    grounded = [r for r in pack.readings if r.url in allowed]
    if len(grounded) != len(pack.readings):
        warn(
            f"dropped {len(pack.readings) - len(grounded)} reading(s) whose urls "
            "were not in the search results"
        )
    return pack.model_copy(update={"readings": grounded})
