"""Acceptance suite: the numbered exit criteria for this artifact.

Each test prints one PASS/FAIL line (see conftest). Criteria in order:
 1. end-to-end mock heart scenario through the real CLI, < 5 s
 2. rejection feedback threads into the retry generation prompt
 3. exhaustion bound: N rejections -> N verdicts, exit code 2
 4. 1,000 randomized runs only take legal state-machine paths
 5. verdict schema property incl. bounded repair of malformed replies
 6. GLB corpus: 5 cross-checked good files, 5 named corruption rejections
 7. 200-bundle round-trip property + per-byte tamper evidence
 8. agents send the golden on-disk prompts byte-for-byte
 9. API liveness within the stage budget, clean streams, no secret leakage
"""
from __future__ import annotations

import json
import os
import random
import struct
import subprocess
import sys
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from xrauthor.agents import review
from xrauthor.bundle import (
    BadMagic,
    DigestMismatch,
    LengthMismatch,
    MalformedJsonChunk,
    NoMeshes,
    UnsupportedVersion,
    read_bundle,
    validate_glb,
    write_bundle,
)
from xrauthor.errors import MalformedOutput
from xrauthor.idclock import SeededIdClock
from xrauthor.models import CRITERION_ORDER
from xrauthor.pipeline import (
    EventKind,
    FailureReason,
    FileJobStore,
    JobEvent,
    JobState,
    StageDependencies,
    TERMINAL_STATES,
    count_stage_executions,
    is_legal_path,
    run_to_completion,
    submit,
)
from xrauthor.providers import (
    MockChatProvider,
    MockGenerationProvider,
    MockSearchProvider,
    ProviderConfig,
)
from xrauthor.service import create_app

import bundlegen
import doubles
import glb_builder
from conftest import HEART_PROMPT, scenario_dir
from randruns import random_run, state_trace

HEART_CLI_ARGS = [
    "run",
    "--prompt",
    HEART_PROMPT,
    "--grade",
    "6-8",
    "--no-approval",
    "--provider-mode",
    "mock",
    "--seed",
    "1",
]


def run_cli(args: list[str], cwd: Path, env_extra: dict[str, str] | None = None):
    env = dict(os.environ)
    env.pop("MOCK_FIXTURE_DIR", None)
    env.update(env_extra or {})
    return subprocess.run(
        [sys.executable, "-m", "xrauthor", *args],
        cwd=cwd,
        env=env,
        capture_output=True,
        text=True,
        timeout=60,
    )


def test_1_end_to_end_mock_heart_scenario(tmp_path):
    started = time.monotonic()
    result = run_cli(HEART_CLI_ARGS, cwd=tmp_path)
    elapsed = time.monotonic() - started
    assert result.returncode == 0, result.stderr
    assert elapsed < 5.0, f"CLI run took {elapsed:.2f}s (budget 5s)"

    bundle = tmp_path / "bundle"
    manifest = read_bundle(bundle)  # re-validates every invariant
    assert len(manifest.verdicts) == 1
    final = manifest.verdicts[0]
    assert final.approved
    assert [c.key for c in final.criteria] == list(CRITERION_ORDER)

    tutor = json.loads((bundle / "tutor.json").read_text())
    assert len(tutor["annotations"]) >= 1
    assert len(tutor["vocabulary"]) >= 1
    assert len(tutor["quiz"]) >= 1
    quiz = tutor["quiz"][0]
    assert 0 <= quiz["correct_index"] < len(quiz["choices"])


def test_2_rejection_feedback_threads_into_retry(tmp_path, heart_request, clock):
    fixture_dir = scenario_dir("retry_bias")
    store = FileJobStore(tmp_path / "data")
    deps = StageDependencies(
        chat=MockChatProvider(fixture_dir),
        generation=MockGenerationProvider(fixture_dir),
        search=MockSearchProvider(fixture_dir),
        store=store,
        clock=clock,
        poll_interval=0.0,
        poll_deadline=5.0,
    )
    job_id = submit(heart_request, store, clock)
    first_prompt = None
    job = store.load(job_id)
    while job.state not in TERMINAL_STATES:
        job = run_to_completion(job, deps)
    assert job.state == JobState.COMPLETE

    generations = [
        e for e in job.events
        if e.kind == EventKind.STAGE_COMPLETED and e.stage == JobState.GENERATING
    ]
    assert len(generations) == 2, "exactly two generations: original plus one retry"
    assert len(job.verdict_history) == 2
    rejection = job.verdict_history[0]
    assert not rejection.approved

    first_prompt = job.spec.refined_prompt
    retry_prompt = job.generation_prompt
    assert retry_prompt != first_prompt
    for criterion in rejection.failing():
        assert criterion.rationale in retry_prompt, "feedback clause must thread through"
    assert rejection.revision_feedback in retry_prompt


def test_3_exhaustion_bound_three_rejections(tmp_path):
    data_dir = tmp_path / "data"
    result = run_cli(
        HEART_CLI_ARGS + ["--max-attempts", "3", "--data-dir", str(data_dir)],
        cwd=tmp_path,
        env_extra={"MOCK_FIXTURE_DIR": str(scenario_dir("always_reject"))},
    )
    assert result.returncode == 2, result.stderr

    verdicts = json.loads((tmp_path / "bundle" / "verdicts.json").read_text())
    assert len(verdicts) == 3
    assert all(not v["approved"] for v in verdicts)

    job_files = list((data_dir / "jobs").glob("*/job.json"))
    assert len(job_files) == 1
    job_doc = json.loads(job_files[0].read_text())
    assert job_doc["state"] == "failed"
    assert job_doc["failure_reason"] == "safety_exhausted"


def test_4_thousand_randomized_runs_follow_the_graph(tmp_path):
    violations = []
    for seed in range(1000):
        job, trace = random_run(seed, tmp_path / f"r{seed}")
        if not (
            trace
            and trace[0] == JobState.RECEIVED
            and is_legal_path(trace)
            and job.state in TERMINAL_STATES
            and trace[-1] == job.state
        ):
            violations.append((seed, [s.value for s in trace]))
    assert violations == [], f"{len(violations)} illegal traces, first: {violations[:3]}"


def test_5_verdict_schema_property():
    rng = random.Random(20260809)
    # Parse-passing replies: any pass/fail combination must yield exactly the
    # five canonical criteria with a consistent overall decision.
    for _ in range(200):
        failing = {
            key.value: f"issue {rng.randint(0, 999)}"
            for key in CRITERION_ORDER
            if rng.random() < 0.5
        }
        payload = doubles.verdict_payload(failing=failing, feedback="f" * rng.randint(1, 9))
        chat = doubles.ScriptedChat([json.dumps(payload)])
        verdict = review(doubles.make_spec(), None, chat)
        assert [c.key for c in verdict.criteria] == list(CRITERION_ORDER)
        assert verdict.approved == all(c.passed for c in verdict.criteria)

    # Malformed replies: dropped, duplicated, extra, and mistyped criteria are
    # all rejected after exactly 1 + 2 repair calls.
    for _ in range(100):
        payload = doubles.verdict_payload()
        corruption = rng.choice(["drop", "extra", "badtype", "badkey", "notdict"])
        index = rng.randrange(5)
        if corruption == "drop":
            payload["criteria"].pop(index)
        elif corruption == "extra":
            payload["criteria"].append(dict(payload["criteria"][index]))
        elif corruption == "badtype":
            payload["criteria"][index]["passed"] = "yes"
        elif corruption == "badkey":
            payload["criteria"][index]["key"] = "novelty"
        else:
            payload = {"criteria": 7}
        chat = doubles.ScriptedChat([json.dumps(payload)])
        with pytest.raises(MalformedOutput):
            review(doubles.make_spec(), None, chat)
        assert len(chat.requests) == 3


def test_6_glb_validator_corpus():
    for name, build in sorted(glb_builder.GOOD_CORPUS.items()):
        meta = validate_glb(build())
        assert meta.mesh_count >= 1, name

    pristine = glb_builder.single_triangle()

    bad_magic = bytearray(pristine)
    bad_magic[0:4] = b"GLTF"
    with pytest.raises(BadMagic):
        validate_glb(bytes(bad_magic))

    bad_version = bytearray(pristine)
    bad_version[4:8] = struct.pack("<I", 3)
    with pytest.raises(UnsupportedVersion):
        validate_glb(bytes(bad_version))

    bad_length = bytearray(pristine)
    bad_length[8:12] = struct.pack("<I", len(pristine) - 2)
    with pytest.raises(LengthMismatch):
        validate_glb(bytes(bad_length))

    bad_json = bytearray(pristine)
    bad_json[20] = ord("}")
    with pytest.raises(MalformedJsonChunk):
        validate_glb(bytes(bad_json))

    with pytest.raises(NoMeshes):
        validate_glb(glb_builder.zero_mesh_glb())


def test_7_bundle_round_trip_property(tmp_path):
    rng = random.Random(7)
    for i in range(200):
        inputs = bundlegen.random_bundle_inputs(rng)
        target = tmp_path / f"b{i}"
        manifest = write_bundle(target, **inputs)
        assert read_bundle(target) == manifest, f"bundle {i} did not round-trip"

    # Tamper evidence: flipping any single byte of the asset is detected.
    target = tmp_path / "tamper"
    inputs = bundlegen.random_bundle_inputs(rng)
    write_bundle(target, **inputs)
    model = target / "model.glb"
    pristine = model.read_bytes()
    for position in range(len(pristine)):
        mutated = bytearray(pristine)
        mutated[position] ^= 0x01
        model.write_bytes(bytes(mutated))
        with pytest.raises(DigestMismatch):
            read_bundle(target)
    model.write_bytes(pristine)


def test_8_prompt_fidelity_golden(heart_request):
    from test_prompts import prompt_file_text, sent_system

    for agent in ("pedagogical", "safeguard", "tutor"):
        system = sent_system(agent, heart_request)
        assert prompt_file_text(agent) in system, f"{agent} prompt drifted from its file"


def test_9_api_liveness_and_hygiene(tmp_path):
    secret = "sk-ACCEPTANCE-SECRET-9z"
    config = ProviderConfig(
        mode="mock", fixture_dir=scenario_dir("default"), chat_api_key=secret
    )
    app = create_app(
        data_dir=tmp_path / "data", provider_config=config, clock=SeededIdClock(11)
    )
    with TestClient(app) as client:
        body = {
            "prompt_text": HEART_PROMPT,
            "grade_band": "6-8",
            "subject": "General",
            "topic": "",
            "require_approval": False,
            "max_safety_attempts": 3,
        }
        job_id = client.post("/api/jobs", json=body).json()["job_id"]

        deadline = time.monotonic() + 10
        view = None
        while time.monotonic() < deadline:
            view = client.get(f"/api/jobs/{job_id}").json()
            if view["state"] in ("complete", "failed"):
                break
            time.sleep(0.02)
        assert view and view["state"] == "complete"

        stream = client.get(f"/api/jobs/{job_id}/events")
        lines = stream.text.strip().splitlines()
        events = [JobEvent.model_validate(json.loads(line)) for line in lines]
        assert events[-1].kind == EventKind.STAGE_ENTERED
        assert events[-1].stage in (JobState.COMPLETE, JobState.FAILED)

        budget = 3 + 2 * body["max_safety_attempts"]
        executed = count_stage_executions(events)
        assert executed <= budget, f"{executed} stage executions > budget {budget}"

        for text in (
            client.get(f"/api/jobs/{job_id}").text,
            stream.text,
            client.get(f"/api/bundles/{job_id}/manifest.json").text,
        ):
            assert secret not in text
