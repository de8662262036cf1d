"""Clients for the external chat, text-to-3D generation, and search services."""

from .config import ProviderConfig, Providers, build_providers, default_fixture_dir
from .mock import (
    MockChatProvider,
    MockGenerationProvider,
    MockSearchProvider,
    fixture_key,
    normalize_query,
)
from .types import (
    ChatMessage,
    ChatParams,
    ChatProvider,
    ChatReply,
    ChatRequest,
    GenerationProvider,
    GenerationStatus,
    GenerationTask,
    SearchProvider,
    SearchResult,
    TokenUsage,
)

__all__ = [
    "ChatMessage",
    "ChatParams",
    "ChatProvider",
    "ChatReply",
    "ChatRequest",
    "GenerationProvider",
    "GenerationStatus",
    "GenerationTask",
    "MockChatProvider",
    "MockGenerationProvider",
    "MockSearchProvider",
    "ProviderConfig",
    "Providers",
    "SearchProvider",
    "SearchResult",
    "TokenUsage",
    "build_providers",
    "default_fixture_dir",
    "fixture_key",
    "normalize_query",
]
