"""HTTP clients for the real chat, text-to-3D, and web-search services.

Each client maps one provider's wire format onto the package-level types and
normalizes failures into the shared error taxonomy. Transient failures are
retried with bounded backoff; a per-client semaphore caps in-flight requests.
"""
from __future__ import annotations

import logging
import threading
from typing import Callable, Optional

import httpx

from ..errors import (
    AuthError,
    InvalidArgument,
    NetworkError,
    NotFound,
    ProviderError,
    QuotaExceeded,
    RateLimited,
    TimeoutError,
    TransientProviderError,
    UnknownTask,
)
from .mock import poll_loop
from .retry import retry_transient
from .types import (
    ChatReply,
    ChatRequest,
    GenerationStatus,
    GenerationTask,
    PollCallback,
    SearchResult,
    TokenUsage,
)

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT_S = 60.0
MAX_IN_FLIGHT = 4


def _raise_for_status(response: httpx.Response, *, quota_statuses: tuple[int, ...] = ()) -> None:
    code = response.status_code
    if code < 400:
        return
    body = response.text[:200]
    if code in quota_statuses:
        raise QuotaExceeded(f"provider quota exhausted (HTTP {code}): {body}")
    if code in (401, 403):
        raise AuthError(f"provider rejected credentials (HTTP {code}): {body}")
    if code == 404:
        raise NotFound(f"provider returned 404: {body}")
    if code == 429:
        raise RateLimited(f"provider rate limit (HTTP 429): {body}")
    if code >= 500:
        raise TransientProviderError(f"provider server error (HTTP {code}): {body}")
    raise ProviderError(f"provider error (HTTP {code}): {body}")


class _HttpClientBase:
    def __init__(
        self,
        *,
        client: Optional[httpx.Client] = None,
        timeout: float = DEFAULT_TIMEOUT_S,
        max_in_flight: int = MAX_IN_FLIGHT,
        sleep: Callable[[float], None] | None = None,
    ):
        self._client = client or httpx.Client(timeout=timeout)
        self._semaphore = threading.BoundedSemaphore(max_in_flight)
        self._sleep = sleep

    def _request(self, method: str, url: str, *, quota_statuses=(), **kwargs) -> httpx.Response:
        def attempt() -> httpx.Response:
            with self._semaphore:
                try:
                    response = self._client.request(method, url, **kwargs)
                except httpx.TimeoutException as exc:
                    raise TimeoutError(f"request to {url} timed out: {exc}") from exc
                except httpx.HTTPError as exc:
                    raise NetworkError(f"request to {url} failed: {exc}") from exc
            _raise_for_status(response, quota_statuses=quota_statuses)
            return response

        if self._sleep is not None:
            return retry_transient(attempt, sleep=self._sleep)
        return retry_transient(attempt)


class OpenAIChatProvider(_HttpClientBase):
    """Chat-completions style endpoint (OpenAI wire format)."""

    supports_images = True

    def __init__(self, api_key: str, base_url: str, model: str, **kwargs):
        super().__init__(**kwargs)
        self.base_url = base_url.rstrip("/")
        self.model = model
        self._headers = {"Authorization": f"Bearer {api_key}"}

    def chat(self, request: ChatRequest) -> ChatReply:
        messages: list[dict] = [{"role": "system", "content": request.system}]
        for msg in request.messages:
            if msg.image_ref:
                content: object = [
                    {"type": "text", "text": msg.text},
                    {"type": "image_url", "image_url": {"url": msg.image_ref}},
                ]
            else:
                content = msg.text
            messages.append({"role": msg.role, "content": content})
        body = {
            "model": self.model,
            "messages": messages,
            "max_tokens": request.params.max_tokens,
            "temperature": request.params.temperature,
        }
        response = self._request(
            "POST", f"{self.base_url}/chat/completions", json=body, headers=self._headers
        )
        data = response.json()
        try:
            text = data["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"unexpected chat-completions payload: {exc}") from exc
        usage = data.get("usage", {})
        return ChatReply(
            text=text,
            usage=TokenUsage(
                input_tokens=usage.get("prompt_tokens", 0),
                output_tokens=usage.get("completion_tokens", 0),
            ),
        )


class AnthropicChatProvider(_HttpClientBase):
    """Messages-style endpoint (Anthropic wire format)."""

    supports_images = True

    def __init__(self, api_key: str, base_url: str, model: str, **kwargs):
        super().__init__(**kwargs)
        self.base_url = base_url.rstrip("/")
        self.model = model
        self._headers = {"x-api-key": api_key, "anthropic-version": "2023-06-01"}

    def chat(self, request: ChatRequest) -> ChatReply:
        messages = []
        for msg in request.messages:
            blocks: list[dict] = [{"type": "text", "text": msg.text}]
            if msg.image_ref:
                blocks.append(
                    {"type": "image", "source": {"type": "url", "url": msg.image_ref}}
                )
            messages.append({"role": msg.role, "content": blocks})
        body = {
            "model": self.model,
            "system": request.system,
            "messages": messages,
            "max_tokens": request.params.max_tokens,
            "temperature": request.params.temperature,
        }
        response = self._request(
            "POST", f"{self.base_url}/v1/messages", json=body, headers=self._headers
        )
        data = response.json()
        try:
            text = "".join(
                block.get("text", "") for block in data["content"] if block.get("type") == "text"
            )
        except (KeyError, TypeError) as exc:
            raise ProviderError(f"unexpected messages payload: {exc}") from exc
        usage = data.get("usage", {})
        return ChatReply(
            text=text,
            usage=TokenUsage(
                input_tokens=usage.get("input_tokens", 0),
                output_tokens=usage.get("output_tokens", 0),
            ),
        )


_GENERATION_STATUS_MAP = {
    "PENDING": GenerationStatus.PENDING,
    "IN_PROGRESS": GenerationStatus.IN_PROGRESS,
    "SUCCEEDED": GenerationStatus.SUCCEEDED,
    "FAILED": GenerationStatus.FAILED,
    "CANCELED": GenerationStatus.FAILED,
    "EXPIRED": GenerationStatus.FAILED,
}


class MeshyGenerationProvider(_HttpClientBase):
    """Create-then-poll text-to-3D task API (Meshy wire format)."""

    def __init__(self, api_key: str, base_url: str = "https://api.meshy.ai", **kwargs):
        super().__init__(**kwargs)
        self.base_url = base_url.rstrip("/")
        self._headers = {"Authorization": f"Bearer {api_key}"}

    def start_generation(self, prompt: str) -> str:
        if not prompt.strip():
            raise InvalidArgument("generation prompt must be non-empty")
        body = {"mode": "preview", "prompt": prompt, "art_style": "realistic"}
        response = self._request(
            "POST",
            f"{self.base_url}/openapi/v2/text-to-3d",
            json=body,
            headers=self._headers,
            quota_statuses=(402,),
        )
        data = response.json()
        task_id = data.get("result")
        if not task_id:
            raise ProviderError(f"task creation returned no id: {data}")
        return str(task_id)

    def _get_task(self, task_id: str) -> GenerationTask:
        try:
            response = self._request(
                "GET",
                f"{self.base_url}/openapi/v2/text-to-3d/{task_id}",
                headers=self._headers,
            )
        except NotFound as exc:
            raise UnknownTask(f"unknown generation task {task_id}") from exc
        data = response.json()
        raw_status = str(data.get("status", "")).upper()
        status = _GENERATION_STATUS_MAP.get(raw_status)
        if status is None:
            raise ProviderError(f"unrecognized task status {raw_status!r}")
        model_url = (data.get("model_urls") or {}).get("glb")
        failure = (data.get("task_error") or {}).get("message")
        return GenerationTask(
            task_id=task_id,
            status=status,
            progress=int(data.get("progress", 0) or 0),
            model_url=model_url if status == GenerationStatus.SUCCEEDED else None,
            preview_image_url=data.get("thumbnail_url"),
            failure_reason=failure if status == GenerationStatus.FAILED else None,
        )

    def poll_generation(
        self,
        task_id: str,
        poll_interval: float,
        deadline: float,
        on_poll: Optional[PollCallback] = None,
        cancel=None,
    ) -> GenerationTask:
        return poll_loop(self._get_task, task_id, poll_interval, deadline, on_poll, cancel)

    def fetch_asset(self, model_url: str) -> bytes:
        response = self._request("GET", model_url)
        declared = response.headers.get("Content-Length")
        body = response.content
        if declared is not None and int(declared) != len(body):
            raise NetworkError(
                f"truncated download: declared {declared} bytes, got {len(body)}"
            )
        return body


class TavilySearchProvider(_HttpClientBase):
    """Web-search endpoint (Tavily wire format)."""

    def __init__(self, api_key: str, base_url: str = "https://api.tavily.com", **kwargs):
        super().__init__(**kwargs)
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key

    def search(self, query: str, k: int) -> list[SearchResult]:
        if not query.strip():
            raise InvalidArgument("search query must be non-empty")
        if k < 1:
            raise InvalidArgument("k must be >= 1")
        body = {"api_key": self.api_key, "query": query, "max_results": k}
        response = self._request("POST", f"{self.base_url}/search", json=body)
        data = response.json()
        results = []
        for item in data.get("results", []):
            score = item.get("score", 0.0)
            results.append(
                SearchResult(
                    title=item.get("title", ""),
                    url=item["url"],
                    snippet=item.get("content", ""),
                    score=max(0.0, min(1.0, float(score))),
                )
            )
        results.sort(key=lambda r: r.score, reverse=True)
        return results[:k]
