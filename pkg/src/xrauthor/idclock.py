"""Id and timestamp sources, swappable so runs can be made reproducible."""
from __future__ import annotations

import threading
import uuid
from datetime import datetime, timedelta, timezone
from typing import Protocol


class IdClock(Protocol):
    def new_job_id(self) -> str: ...

    def now(self) -> datetime: ...


class SystemIdClock:
    """Real wall clock and random job ids."""

    def new_job_id(self) -> str:
        return f"job-{uuid.uuid4().hex[:12]}"

    def now(self) -> datetime:
        return datetime.now(timezone.utc)


class SeededIdClock:
    """Deterministic ids and a logical clock that ticks one second per read.

    With a fixed seed, a run produces byte-identical ids and timestamps,
    which makes persisted manifests reproducible.
    """

    _EPOCH = datetime(2026, 1, 1, tzinfo=timezone.utc)

    def __init__(self, seed: int):
        self.seed = seed
        self._ids = 0
        self._ticks = 0
        self._lock = threading.Lock()

    def new_job_id(self) -> str:
        with self._lock:
            self._ids += 1
            return f"job-{self.seed:06x}-{self._ids:04d}"

    def now(self) -> datetime:
        with self._lock:
            self._ticks += 1
            return self._EPOCH + timedelta(seconds=self._ticks)
