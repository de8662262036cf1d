#!/usr/bin/env python3
"""Author the packaged mock-provider fixture scenarios.

Chat fixtures are keyed by a content hash of the exact request the pipeline
sends, so they cannot be written by hand: this script runs the real pipeline
against a recording chat provider that serves planned replies and saves each
one under its computed key. Afterwards every scenario is replayed against the
plain fixture-backed mock providers to prove the fixtures are complete.

Run from the repo root:  python3 scripts/build_fixtures.py
"""
from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

import glb_builder  # noqa: E402

from xrauthor.idclock import SeededIdClock  # noqa: E402
from xrauthor.models import AuthoringRequest, GradeBand  # noqa: E402
from xrauthor.pipeline import (  # noqa: E402
    FileJobStore,
    JobState,
    StageDependencies,
    run_to_completion,
    submit,
)
from xrauthor.prompts import load_prompt  # noqa: E402
from xrauthor.providers.mock import (  # noqa: E402
    MockChatProvider,
    MockGenerationProvider,
    MockSearchProvider,
    fixture_key,
    normalize_query,
)
from xrauthor.providers.types import ChatReply, ChatRequest, TokenUsage  # noqa: E402

FIXTURES_ROOT = REPO / "src" / "xrauthor" / "fixtures"

HEART_REQUEST = AuthoringRequest(
    prompt_text="a 3D model of a human heart for a middle school biology class",
    grade_band=GradeBand.G6_8,
    subject="General",
    topic="",
    require_approval=False,
    max_safety_attempts=3,
)

HEART_FEATURES = [
    "four chambers",
    "left and right atria",
    "left and right ventricles",
    "heart valves",
    "aorta",
    "pulmonary arteries",
]

HEART_SPEC = {
    "core_concept": "human heart anatomy",
    "grade_band": "6-8",
    "learning_objectives": [
        "Identify the four chambers of the human heart",
        "Trace the path of blood through the atria, ventricles, and major vessels",
        "Explain how heart valves keep blood flowing in one direction",
    ],
    "required_visual_features": HEART_FEATURES,
    "complexity_notes": (
        "Middle-school depth: show gross anatomy clearly, avoid microscopic "
        "detail and clinical pathology."
    ),
    "refined_prompt": (
        "An anatomically accurate 3D model of a human heart for middle school "
        "biology. Show all four chambers, with the left and right atria above "
        "the left and right ventricles, clearly separated. Include the heart "
        "valves between chambers, the aorta arching from the left ventricle, "
        "and the pulmonary arteries leaving the right ventricle. Use smooth, "
        "clean surfaces with muted natural colors suitable for real-time "
        "rendering on classroom tablets. Keep geometry simple enough for "
        "real-time display. Major structures should be visually distinct so "
        "labels can point at them."
    ),
    "labeling_requirements": [
        "Label each chamber by name",
        "Label the aorta and pulmonary arteries",
    ],
}

APPROVE_VERDICT = {
    "criteria": [
        {
            "key": "age_appropriateness",
            "passed": True,
            "rationale": "Gross anatomy at this level of detail suits grades 6-8.",
        },
        {
            "key": "factual_accuracy",
            "passed": True,
            "rationale": "Chambers, valves, and vessels are described correctly.",
        },
        {
            "key": "no_disturbing_imagery",
            "passed": True,
            "rationale": "Clean stylized anatomy with no gore or graphic tissue.",
        },
        {
            "key": "no_bias",
            "passed": True,
            "rationale": "An anatomical organ model carries no cultural or demographic framing.",
        },
        {
            "key": "educational_value",
            "passed": True,
            "rationale": "Directly supports the stated circulation objectives.",
        },
    ],
    "approved": True,
    "revision_feedback": "",
}

BIAS_REJECT_VERDICT = {
    "criteria": [
        {
            "key": "age_appropriateness",
            "passed": True,
            "rationale": "Detail level is fine for grades 6-8.",
        },
        {
            "key": "factual_accuracy",
            "passed": True,
            "rationale": "Anatomy described is correct.",
        },
        {
            "key": "no_disturbing_imagery",
            "passed": True,
            "rationale": "No graphic or violent content.",
        },
        {
            "key": "no_bias",
            "passed": False,
            "rationale": (
                "The rendered textbook-style figure depicts a single skin tone; "
                "use neutral anatomical coloring instead."
            ),
        },
        {
            "key": "educational_value",
            "passed": True,
            "rationale": "Supports the learning objectives.",
        },
    ],
    "approved": False,
    "revision_feedback": (
        "Render the heart with neutral anatomical colors rather than "
        "skin-tone surface textures so no demographic is implied."
    ),
}

SAFETY_REJECT_VERDICT = {
    "criteria": [
        {
            "key": "age_appropriateness",
            "passed": True,
            "rationale": "Topic suits the grade band.",
        },
        {
            "key": "factual_accuracy",
            "passed": True,
            "rationale": "No factual problems found.",
        },
        {
            "key": "no_disturbing_imagery",
            "passed": False,
            "rationale": (
                "The preview shows exposed vessels with pooled blood rendered "
                "in graphic detail."
            ),
        },
        {
            "key": "no_bias",
            "passed": True,
            "rationale": "No bias concerns.",
        },
        {
            "key": "educational_value",
            "passed": True,
            "rationale": "Educationally on target.",
        },
    ],
    "approved": False,
    "revision_feedback": "Reduce graphic blood detail; prefer a clean schematic look.",
}

SEARCH_RESULTS = [
    {
        "title": "How the Heart Works",
        "url": "https://kids.health.example.org/heart-anatomy",
        "snippet": "The heart has four chambers that pump blood through two loops.",
        "score": 0.92,
    },
    {
        "title": "Your Heart and Circulatory System",
        "url": "https://science.example.edu/circulatory-basics",
        "snippet": "Middle-school primer on atria, ventricles, and valves.",
        "score": 0.87,
    },
    {
        "title": "Heart Valves Explained",
        "url": "https://museum.example.org/heart-valves",
        "snippet": "Why blood only flows one way through the heart.",
        "score": 0.71,
    },
]

TUTOR_PACK = {
    "overview": (
        "This lesson explores the human heart: its four chambers, the valves "
        "between them, and the great vessels that carry blood to the lungs "
        "and body. Students trace the double-loop path of circulation on the "
        "3D model."
    ),
    "annotations": [
        {
            "label": "Right atrium",
            "body": "Receives oxygen-poor blood returning from the body.",
            "anchor": [0.72, 0.68, 0.45],
        },
        {
            "label": "Left ventricle",
            "body": "The strongest chamber; pumps blood out through the aorta.",
            "anchor": [0.38, 0.3, 0.5],
        },
        {
            "label": "Aorta",
            "body": "The largest artery; carries oxygen-rich blood to the body.",
            "anchor": [0.45, 0.9, 0.5],
        },
        {
            "label": "Valve function",
            "body": "Valves open and close with each beat so blood never flows backward.",
            "anchor": "unanchored",
        },
    ],
    "vocabulary": [
        {"term": "atrium", "definition": "An upper chamber of the heart that receives blood."},
        {"term": "ventricle", "definition": "A lower chamber of the heart that pumps blood out."},
        {"term": "valve", "definition": "A flap that keeps blood moving in one direction."},
        {"term": "aorta", "definition": "The largest artery, carrying blood from the heart to the body."},
    ],
    "quiz": [
        {
            "stem": "How many chambers does the human heart have?",
            "choices": ["Two", "Three", "Four", "Five"],
            "correct_index": 2,
            "explanation": "Two atria on top and two ventricles below make four chambers.",
        },
        {
            "stem": "Which chamber pumps oxygen-rich blood into the aorta?",
            "choices": ["Right atrium", "Left ventricle", "Right ventricle"],
            "correct_index": 1,
            "explanation": "The left ventricle drives the body-wide loop of circulation.",
        },
        {
            "stem": "What stops blood from flowing backward between heartbeats?",
            "choices": ["Valves", "Ribs", "Lungs", "Nerves"],
            "correct_index": 0,
            "explanation": "Heart valves close after each contraction.",
        },
    ],
    "readings": [
        {
            "title": "How the Heart Works",
            "url": "https://kids.health.example.org/heart-anatomy",
            "snippet": "The heart has four chambers that pump blood through two loops.",
        },
        {
            "title": "Your Heart and Circulatory System",
            "url": "https://science.example.edu/circulatory-basics",
            "snippet": "Middle-school primer on atria, ventricles, and valves.",
        },
    ],
}


class RecordingChatProvider:
    """Serves planned replies and writes each one under its fixture key."""

    supports_images = True

    def __init__(self, fixture_dir: Path, plans: dict[str, list[dict]]):
        self.fixture_dir = fixture_dir
        self.plans = {agent: list(replies) for agent, replies in plans.items()}
        self._prompts = {agent: load_prompt(agent) for agent in ("pedagogical", "safeguard", "tutor")}

    def _agent_for(self, system: str) -> str:
        for agent, text in self._prompts.items():
            if system.startswith(text):
                return agent
        raise AssertionError("chat request does not match any agent prompt")

    def chat(self, request: ChatRequest) -> ChatReply:
        agent = self._agent_for(request.system)
        queue = self.plans[agent]
        payload = queue.pop(0) if len(queue) > 1 else queue[0]
        reply = ChatReply(
            text=json.dumps(payload, indent=2),
            usage=TokenUsage(input_tokens=700, output_tokens=350),
        )
        key = fixture_key(request.system, request.messages)
        path = self.fixture_dir / "chat" / f"{key}.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps(reply.model_dump(mode="json"), indent=2) + "\n", encoding="utf-8"
        )
        return reply


def write_static_fixtures(fixture_dir: Path, attempts: int) -> None:
    gen_dir = fixture_dir / "generation"
    assets = gen_dir / "assets"
    assets.mkdir(parents=True, exist_ok=True)
    (assets / "heart.glb").write_bytes(glb_builder.tetrahedron())
    tasks = [
        {
            "statuses": [
                {"status": "pending"},
                {"status": "in_progress", "progress": 45},
                {"status": "in_progress", "progress": 90},
                {"status": "succeeded"},
            ],
            "model_url": "mock://generation/assets/heart.glb",
            "preview_image_url": f"mock://previews/heart-attempt-{i + 1}.png",
        }
        for i in range(attempts)
    ]
    (gen_dir / "tasks.json").write_text(json.dumps(tasks, indent=2) + "\n", encoding="utf-8")

    search_dir = fixture_dir / "search"
    search_dir.mkdir(parents=True, exist_ok=True)
    slug = normalize_query("human heart anatomy for grades 6-8")
    (search_dir / f"{slug}.json").write_text(
        json.dumps(SEARCH_RESULTS, indent=2) + "\n", encoding="utf-8"
    )


def run_pipeline(fixture_dir: Path, chat, *, seed: int, max_attempts: int = 3):
    request = HEART_REQUEST.model_copy(update={"max_safety_attempts": max_attempts})
    with tempfile.TemporaryDirectory() as tmp:
        store = FileJobStore(Path(tmp))
        clock = SeededIdClock(seed)
        deps = StageDependencies(
            chat=chat,
            generation=MockGenerationProvider(fixture_dir),
            search=MockSearchProvider(fixture_dir),
            store=store,
            clock=clock,
            poll_interval=0.001,
            poll_deadline=5.0,
        )
        job_id = submit(request, store, clock)
        job = run_to_completion(store.load(job_id), deps)
        return job


def build_scenario(name: str, review_plan: list[dict], expect: JobState, verdicts: int) -> None:
    fixture_dir = FIXTURES_ROOT / name
    if fixture_dir.exists():
        shutil.rmtree(fixture_dir)
    write_static_fixtures(fixture_dir, attempts=max(len(review_plan), 1))
    recorder = RecordingChatProvider(
        fixture_dir,
        plans={
            "pedagogical": [HEART_SPEC],
            "safeguard": review_plan,
            "tutor": [TUTOR_PACK],
        },
    )
    job = run_pipeline(fixture_dir, recorder, seed=1)

    # Replay with the plain mock provider (and a different seed) to prove the
    # recorded fixtures are complete and key-stable.
    replay = run_pipeline(fixture_dir, MockChatProvider(fixture_dir), seed=99)
    for label, run in (("authored", job), ("replay", replay)):
        assert run.state == expect, f"{name} {label}: ended {run.state}, wanted {expect}"
        assert len(run.verdict_history) == verdicts, (
            f"{name} {label}: {len(run.verdict_history)} verdicts, wanted {verdicts}"
        )
        if expect == JobState.FAILED:
            assert run.failure_reason is not None and run.failure_reason.value == "safety_exhausted", (
                f"{name} {label}: failure reason {run.failure_reason}"
            )
    n_chat = len(list((fixture_dir / "chat").glob("*.json")))
    print(
        f"{name}: ok ({job.state.value}, {len(job.verdict_history)} verdict(s), "
        f"{n_chat} chat fixtures)"
    )


def main() -> None:
    build_scenario("default", [APPROVE_VERDICT], JobState.COMPLETE, verdicts=1)
    build_scenario(
        "retry_bias", [BIAS_REJECT_VERDICT, APPROVE_VERDICT], JobState.COMPLETE, verdicts=2
    )
    build_scenario(
        "always_reject",
        [SAFETY_REJECT_VERDICT, SAFETY_REJECT_VERDICT, SAFETY_REJECT_VERDICT],
        JobState.FAILED,
        verdicts=3,
    )


if __name__ == "__main__":
    main()
