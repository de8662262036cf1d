"""File-backed job persistence.

Layout under the store root::

    jobs/<job_id>/job.json        current job record (atomic replace)
    jobs/<job_id>/events.jsonl    append-only event log
    jobs/<job_id>/assets/         fetched GLB bytes, one file per attempt
    jobs/<job_id>/bundle/         the final scene bundle

Writers must hold the per-job lock for a read-modify-write cycle; ``save``
additionally refuses stale versions so a lost update can never win silently.
Job record and event log are separate files, so a crash between an event
append and the matching job save can leave the log one entry ahead; recovery
re-runs the interrupted stage from the persisted state.
"""
from __future__ import annotations

import contextlib
import json
import os
import tempfile
import threading
from pathlib import Path

from ..errors import ConflictError, StorageError, UnknownJob
from .job import JobEvent, PipelineJob


class FileJobStore:
    def __init__(self, root: Path):
        self.root = Path(root)
        try:
            (self.root / "jobs").mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot initialize job store at {root}: {exc}") from exc
        self._locks: dict[str, threading.RLock] = {}
        self._locks_guard = threading.Lock()

    # ── locking ────────────────────────────────────────────────────────

    def lock(self, job_id: str) -> contextlib.AbstractContextManager:
        with self._locks_guard:
            lock = self._locks.setdefault(job_id, threading.RLock())
        return lock

    # ── paths ──────────────────────────────────────────────────────────

    def job_dir(self, job_id: str) -> Path:
        return self.root / "jobs" / job_id

    def bundle_dir(self, job_id: str) -> Path:
        return self.job_dir(job_id) / "bundle"

    def exists(self, job_id: str) -> bool:
        return (self.job_dir(job_id) / "job.json").is_file()

    def list_jobs(self) -> list[str]:
        jobs_root = self.root / "jobs"
        return sorted(p.name for p in jobs_root.iterdir() if (p / "job.json").is_file())

    # ── job record ─────────────────────────────────────────────────────

    def create(self, job: PipelineJob) -> None:
        path = self.job_dir(job.job_id)
        if (path / "job.json").exists():
            raise ConflictError(f"job {job.job_id} already exists")
        try:
            path.mkdir(parents=True, exist_ok=True)
            (path / "assets").mkdir(exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot create job dir for {job.job_id}: {exc}") from exc
        self._write_record(job)

    def load(self, job_id: str) -> PipelineJob:
        path = self.job_dir(job_id) / "job.json"
        if not path.is_file():
            raise UnknownJob(f"no job {job_id}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageError(f"cannot read job {job_id}: {exc}") from exc
        job = PipelineJob.model_validate(data)
        job.events = self.read_events(job_id)
        return job

    def save(self, job: PipelineJob) -> PipelineJob:
        """Persist a modified job. The caller's version must match the stored
        one (compare-and-set); on success the version is bumped."""
        with self.lock(job.job_id):
            path = self.job_dir(job.job_id) / "job.json"
            if not path.is_file():
                raise UnknownJob(f"no job {job.job_id}")
            try:
                current = json.loads(path.read_text(encoding="utf-8"))["version"]
            except (OSError, json.JSONDecodeError, KeyError) as exc:
                raise StorageError(f"cannot read job {job.job_id}: {exc}") from exc
            if current != job.version:
                raise ConflictError(
                    f"job {job.job_id} version {job.version} is stale (stored {current})"
                )
            job.version += 1
            self._write_record(job)
            return job

    def _write_record(self, job: PipelineJob) -> None:
        path = self.job_dir(job.job_id) / "job.json"
        payload = (json.dumps(job.model_dump(mode="json"), indent=2) + "\n").encode("utf-8")
        try:
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".job.json.")
            with os.fdopen(fd, "wb") as handle:
                handle.write(payload)
            os.replace(tmp, path)
        except OSError as exc:
            raise StorageError(f"cannot write job {job.job_id}: {exc}") from exc

    # ── event log ──────────────────────────────────────────────────────

    def append_event(self, job_id: str, event: JobEvent) -> None:
        path = self.job_dir(job_id) / "events.jsonl"
        if not self.exists(job_id):
            raise UnknownJob(f"no job {job_id}")
        line = json.dumps(event.model_dump(mode="json")) + "\n"
        try:
            with open(path, "a", encoding="utf-8") as handle:
                handle.write(line)
                handle.flush()
        except OSError as exc:
            raise StorageError(f"cannot append event for {job_id}: {exc}") from exc

    def read_events(self, job_id: str, offset: int = 0) -> list[JobEvent]:
        path = self.job_dir(job_id) / "events.jsonl"
        if not path.is_file():
            return []
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise StorageError(f"cannot read events for {job_id}: {exc}") from exc
        return [JobEvent.model_validate(json.loads(line)) for line in lines[offset:] if line]

    # ── attempt assets ─────────────────────────────────────────────────

    def write_asset(self, job_id: str, name: str, data: bytes) -> str:
        rel = f"assets/{name}"
        path = self.job_dir(job_id) / rel
        try:
            path.parent.mkdir(exist_ok=True)
            path.write_bytes(data)
        except OSError as exc:
            raise StorageError(f"cannot write asset {name} for {job_id}: {exc}") from exc
        return rel

    def read_asset(self, job_id: str, rel: str) -> bytes:
        path = self.job_dir(job_id) / rel
        try:
            return path.read_bytes()
        except OSError as exc:
            raise StorageError(f"cannot read asset {rel} for {job_id}: {exc}") from exc
