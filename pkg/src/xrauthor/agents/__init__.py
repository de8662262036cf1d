"""The three LLM-backed agents: pedagogical interpretation, safety review,
and tutor enrichment."""

from .enrich import enrich, search_query
from .interpret import interpret
from .review import review
from .structured import extract_structured, request_structured

__all__ = ["enrich", "extract_structured", "interpret", "request_structured", "review", "search_query"]
