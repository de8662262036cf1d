from __future__ import annotations

import json
from pathlib import Path

import pytest

from xrauthor.idclock import SeededIdClock
from xrauthor.models import AuthoringRequest, GradeBand
from xrauthor.pipeline import FileJobStore, StageDependencies

import doubles

FIXTURES_ROOT = Path(__file__).resolve().parent.parent / "src" / "xrauthor" / "fixtures"

HEART_PROMPT = "a 3D model of a human heart for a middle school biology class"


@pytest.fixture
def heart_request() -> AuthoringRequest:
    return AuthoringRequest(
        prompt_text=HEART_PROMPT,
        grade_band=GradeBand.G6_8,
        subject="General",
        topic="",
        require_approval=False,
        max_safety_attempts=3,
    )


@pytest.fixture
def clock() -> SeededIdClock:
    return SeededIdClock(1)


@pytest.fixture
def store(tmp_path) -> FileJobStore:
    return FileJobStore(tmp_path / "data")


def build_deps(store, clock, *, chat=None, generation=None, search=None, **kwargs):
    return StageDependencies(
        chat=chat if chat is not None else doubles.RoutedChat(
            {
                "pedagogical": doubles.spec_plan(),
                "safeguard": [doubles.verdict_payload()],
                "tutor": [doubles.tutor_payload()],
            }
        ),
        generation=generation if generation is not None else doubles.ScriptedGeneration(),
        search=search if search is not None else doubles.ScriptedSearch(),
        store=store,
        clock=clock,
        poll_interval=0.0,
        poll_deadline=5.0,
        **kwargs,
    )


@pytest.fixture
def deps(store, clock):
    return build_deps(store, clock)


def scenario_dir(name: str) -> Path:
    path = FIXTURES_ROOT / name
    assert path.is_dir(), f"missing packaged fixture scenario {name}"
    return path


def read_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if "test_acceptance" in report.nodeid and report.when == "call":
        status = "PASS" if report.passed else "FAIL"
        name = report.nodeid.split("::")[-1]
        print(f"\nACCEPTANCE {status}: {name}", flush=True)
