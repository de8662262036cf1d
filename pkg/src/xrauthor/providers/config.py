"""Provider selection and credentials, sourced from the environment.

With no credentials configured the system runs fully offline against the
packaged mock fixtures, so nothing here is required for tests or demos.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path
from typing import Literal, Optional

from ..errors import ValidationError
from .live import (
    AnthropicChatProvider,
    MeshyGenerationProvider,
    OpenAIChatProvider,
    TavilySearchProvider,
)
from .mock import MockChatProvider, MockGenerationProvider, MockSearchProvider
from .types import ChatProvider, GenerationProvider, SearchProvider

DEFAULT_OPENAI_BASE = "https://api.openai.com/v1"
DEFAULT_ANTHROPIC_BASE = "https://api.anthropic.com"


def default_fixture_dir() -> Path:
    """The packaged happy-path scenario fixtures."""
    return Path(str(files("xrauthor.fixtures") / "default"))


@dataclass(frozen=True)
class ProviderConfig:
    mode: Literal["live", "mock"] = "mock"
    chat_api_key: str = ""
    chat_api_base: str = ""
    chat_model: str = "gpt-4o-mini"
    chat_flavor: Literal["openai", "anthropic"] = "openai"
    meshy_api_key: str = ""
    tavily_api_key: str = ""
    fixture_dir: Path = field(default_factory=default_fixture_dir)

    @classmethod
    def from_env(cls, env: Optional[dict[str, str]] = None) -> "ProviderConfig":
        env = dict(os.environ if env is None else env)
        chat_key = env.get("CHAT_API_KEY", "")
        meshy_key = env.get("MESHY_API_KEY", "")
        tavily_key = env.get("TAVILY_API_KEY", "")
        mode = env.get("PROVIDER_MODE", "").strip().lower()
        if mode not in ("live", "mock"):
            # No explicit choice: run live only when every credential exists.
            mode = "live" if (chat_key and meshy_key and tavily_key) else "mock"
        model = env.get("CHAT_MODEL", "gpt-4o-mini")
        flavor = env.get("CHAT_API_FLAVOR", "").strip().lower()
        if flavor not in ("openai", "anthropic"):
            flavor = "anthropic" if model.lower().startswith("claude") else "openai"
        base = env.get("CHAT_API_BASE", "") or (
            DEFAULT_ANTHROPIC_BASE if flavor == "anthropic" else DEFAULT_OPENAI_BASE
        )
        fixture_dir = Path(env["MOCK_FIXTURE_DIR"]) if env.get("MOCK_FIXTURE_DIR") else default_fixture_dir()
        return cls(
            mode=mode,  # type: ignore[arg-type]
            chat_api_key=chat_key,
            chat_api_base=base,
            chat_model=model,
            chat_flavor=flavor,  # type: ignore[arg-type]
            meshy_api_key=meshy_key,
            tavily_api_key=tavily_key,
            fixture_dir=fixture_dir,
        )

    def secret_values(self) -> tuple[str, ...]:
        """Credential strings that must never appear in logs or responses."""
        return tuple(
            v for v in (self.chat_api_key, self.meshy_api_key, self.tavily_api_key) if v
        )


@dataclass(frozen=True)
class Providers:
    chat: ChatProvider
    generation: GenerationProvider
    search: SearchProvider


def build_providers(config: ProviderConfig) -> Providers:
    if config.mode == "mock":
        fixture_dir = config.fixture_dir
        return Providers(
            chat=MockChatProvider(fixture_dir),
            generation=MockGenerationProvider(fixture_dir),
            search=MockSearchProvider(fixture_dir),
        )
    missing = [
        name
        for name, value in (
            ("CHAT_API_KEY", config.chat_api_key),
            ("MESHY_API_KEY", config.meshy_api_key),
            ("TAVILY_API_KEY", config.tavily_api_key),
        )
        if not value
    ]
    if missing:
        raise ValidationError(f"live provider mode needs credentials: {', '.join(missing)}")
    if config.chat_flavor == "anthropic":
        chat: ChatProvider = AnthropicChatProvider(
            config.chat_api_key, config.chat_api_base, config.chat_model
        )
    else:
        chat = OpenAIChatProvider(config.chat_api_key, config.chat_api_base, config.chat_model)
    return Providers(
        chat=chat,
        generation=MeshyGenerationProvider(config.meshy_api_key),
        search=TavilySearchProvider(config.tavily_api_key),
    )
