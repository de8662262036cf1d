"""Deterministic in-process providers backed by fixture files on disk.

Fixture directory layout::

    chat/<key>.json         reply for the chat request hashing to <key>
    generation/tasks.json   ordered task scripts, one per start_generation call
    generation/assets/*     bytes served for mock:// model urls
    search/<slug>.json      results for the query normalizing to <slug>

Identical inputs always yield identical outputs, across process restarts.
"""
from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from pathlib import Path
from typing import Optional

from ..errors import (
    Cancelled,
    InvalidArgument,
    MockFixtureMissing,
    NotFound,
    ProviderError,
    SearchError,
    TimeoutError,
    UnknownTask,
)
from .types import (
    ChatReply,
    ChatRequest,
    GenerationStatus,
    GenerationTask,
    PollCallback,
    SearchResult,
    status_regressed,
)


def fixture_key(system: str, messages) -> str:
    """Stable content hash of a chat request, used as the fixture file name."""
    payload = {
        "system": system,
        "messages": [
            {"role": m.role, "text": m.text, "image_ref": m.image_ref} for m in messages
        ],
    }
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def normalize_query(query: str) -> str:
    """Slug used as the search fixture file name."""
    slug = re.sub(r"[^a-z0-9]+", "-", query.strip().lower()).strip("-")
    return slug or "empty"


class MockChatProvider:
    supports_images = True

    def __init__(self, fixture_dir: Path):
        self.fixture_dir = Path(fixture_dir)

    def chat(self, request: ChatRequest) -> ChatReply:
        key = fixture_key(request.system, request.messages)
        path = self.fixture_dir / "chat" / f"{key}.json"
        if not path.is_file():
            last_user = request.messages[-1].text
            raise MockFixtureMissing(
                f"no chat fixture {path}; system starts {request.system[:80]!r}, "
                f"last user message starts {last_user[:120]!r}",
                key=key,
                path=str(path),
            )
        data = json.loads(path.read_text(encoding="utf-8"))
        return ChatReply.model_validate(data)


def poll_loop(
    get_task,
    task_id: str,
    poll_interval: float,
    deadline: float,
    on_poll: Optional[PollCallback] = None,
    cancel: Optional[threading.Event] = None,
) -> GenerationTask:
    """Shared polling loop: terminal status wins, deadline raises, statuses
    may never regress (succeeded/failed are absorbing)."""
    start = time.monotonic()
    last_status: Optional[GenerationStatus] = None
    while True:
        if cancel is not None and cancel.is_set():
            raise Cancelled(f"poll of task {task_id} cancelled")
        task = get_task(task_id)
        if last_status is not None and status_regressed(last_status, task.status):
            raise ProviderError(
                f"task {task_id} status regressed from {last_status.value} to {task.status.value}"
            )
        last_status = task.status
        if on_poll is not None:
            on_poll(task)
        if task.status in (GenerationStatus.SUCCEEDED, GenerationStatus.FAILED):
            return task
        if time.monotonic() - start + poll_interval > deadline:
            raise TimeoutError(
                f"task {task_id} still {task.status.value} after {deadline}s deadline"
            )
        if cancel is not None:
            cancel.wait(poll_interval)
        else:
            time.sleep(poll_interval)


class MockGenerationProvider:
    """Plays back scripted task status sequences from generation/tasks.json."""

    def __init__(self, fixture_dir: Path):
        self.fixture_dir = Path(fixture_dir)
        scripts_path = self.fixture_dir / "generation" / "tasks.json"
        if scripts_path.is_file():
            self._scripts = json.loads(scripts_path.read_text(encoding="utf-8"))
        else:
            self._scripts = []
        self._lock = threading.Lock()
        self._tasks: dict[str, dict] = {}
        self._poll_counts: dict[str, int] = {}

    def start_generation(self, prompt: str) -> str:
        if not prompt.strip():
            raise InvalidArgument("generation prompt must be non-empty")
        with self._lock:
            index = len(self._tasks)
            task_id = f"task-{index + 1:04d}"
            if not self._scripts:
                raise MockFixtureMissing(
                    f"no generation scripts in {self.fixture_dir / 'generation' / 'tasks.json'}"
                )
            # Calls beyond the scripted list replay the last script.
            script = self._scripts[min(index, len(self._scripts) - 1)]
            self._tasks[task_id] = script
            self._poll_counts[task_id] = 0
        return task_id

    def _get_task(self, task_id: str) -> GenerationTask:
        with self._lock:
            if task_id not in self._tasks:
                raise UnknownTask(f"unknown generation task {task_id}")
            script = self._tasks[task_id]
            step = self._poll_counts[task_id]
            statuses = script.get("statuses", [])
            if not statuses:
                raise ProviderError(f"generation script for {task_id} has no statuses")
            state = statuses[min(step, len(statuses) - 1)]
            self._poll_counts[task_id] = step + 1
        status = GenerationStatus(state["status"])
        return GenerationTask(
            task_id=task_id,
            status=status,
            progress=state.get("progress", 100 if status == GenerationStatus.SUCCEEDED else 0),
            model_url=script.get("model_url") if status == GenerationStatus.SUCCEEDED else None,
            preview_image_url=script.get("preview_image_url"),
            failure_reason=script.get("failure_reason") if status == GenerationStatus.FAILED else None,
        )

    def poll_generation(
        self,
        task_id: str,
        poll_interval: float,
        deadline: float,
        on_poll: Optional[PollCallback] = None,
        cancel: Optional[threading.Event] = None,
    ) -> GenerationTask:
        return poll_loop(self._get_task, task_id, poll_interval, deadline, on_poll, cancel)

    def fetch_asset(self, model_url: str) -> bytes:
        if not model_url.startswith("mock://"):
            raise NotFound(f"mock generation cannot serve {model_url!r}")
        rel = model_url.removeprefix("mock://")
        path = (self.fixture_dir / rel).resolve()
        if not str(path).startswith(str(self.fixture_dir.resolve())):
            raise NotFound(f"asset path escapes fixture dir: {model_url!r}")
        if not path.is_file():
            raise NotFound(f"no fixture asset at {path}")
        return path.read_bytes()


class MockSearchProvider:
    def __init__(self, fixture_dir: Path):
        self.fixture_dir = Path(fixture_dir)

    def search(self, query: str, k: int) -> list[SearchResult]:
        if not query.strip():
            raise InvalidArgument("search query must be non-empty")
        if k < 1:
            raise InvalidArgument("k must be >= 1")
        path = self.fixture_dir / "search" / f"{normalize_query(query)}.json"
        if not path.is_file():
            raise SearchError(f"no search fixture for query {query!r} at {path}")
        data = json.loads(path.read_text(encoding="utf-8"))
        if isinstance(data, dict) and "error" in data:
            raise SearchError(str(data["error"]))
        results = [SearchResult.model_validate(item) for item in data]
        results.sort(key=lambda r: r.score, reverse=True)
        return results[:k]
