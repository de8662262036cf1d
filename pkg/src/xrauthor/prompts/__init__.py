"""Agent system prompts.

Each agent's core instructions live in a plain-text file in this directory
and are sent verbatim. The machine-readable output contract is appended as a
separate block so the instruction text itself stays untouched.
"""
from __future__ import annotations

from importlib.resources import files

AGENT_NAMES = ("pedagogical", "safeguard", "tutor")


def load_prompt(agent: str) -> str:
    """Return the on-disk instruction text for one agent, byte-for-byte."""
    if agent not in AGENT_NAMES:
        raise KeyError(f"unknown agent {agent!r}; expected one of {AGENT_NAMES}")
    return (files(__package__) / f"{agent}.txt").read_text(encoding="utf-8")


PEDAGOGICAL_OUTPUT_CONTRACT = """\
Output format: reply with a single JSON object and no other text, shaped exactly like this:
{
  "core_concept": "<short name of the educational concept>",
  "grade_band": "<one of: K-2, 3-5, 6-8, 9-12>",
  "learning_objectives": ["<1 to 6 learning objectives>"],
  "required_visual_features": ["<1 to 12 visual features that must be present>"],
  "complexity_notes": "<how the detail level fits the grade band>",
  "refined_prompt": "<the full 3D generation prompt; it must mention every entry of required_visual_features>",
  "labeling_requirements": ["<0 to 12 labeling notes>"]
}"""

SAFEGUARD_OUTPUT_CONTRACT = """\
Output format: reply with a single JSON object and no other text, shaped exactly like this:
{
  "criteria": [
    {"key": "age_appropriateness", "passed": true, "rationale": "<non-empty reason>"},
    {"key": "factual_accuracy", "passed": true, "rationale": "<non-empty reason>"},
    {"key": "no_disturbing_imagery", "passed": true, "rationale": "<non-empty reason>"},
    {"key": "no_bias", "passed": true, "rationale": "<non-empty reason>"},
    {"key": "educational_value", "passed": true, "rationale": "<non-empty reason>"}
  ],
  "approved": true,
  "revision_feedback": "<non-empty guidance for the next generation attempt when not approved, otherwise an empty string>"
}
All five criteria keys must appear exactly once. Set "passed" to false for any
dimension that fails, and set "approved" to true only if every criterion passed."""

TUTOR_OUTPUT_CONTRACT = """\
Output format: reply with a single JSON object and no other text, shaped exactly like this:
{
  "overview": "<a structured lesson overview>",
  "annotations": [{"label": "<short label>", "body": "<note text>", "anchor": [0.5, 0.5, 0.5]}],
  "vocabulary": [{"term": "<term>", "definition": "<definition>"}],
  "quiz": [{"stem": "<question>", "choices": ["<2 to 5 distinct choices>"], "correct_index": 0, "explanation": "<why>"}],
  "readings": [{"title": "<title>", "url": "<url>", "snippet": "<short description>"}]
}
Anchors are coordinates in [0,1] on each axis, normalized to the model's
bounding box; use the string "unanchored" when a note has no natural location.
Provide 1-20 annotations, 1-20 vocabulary entries, and 1-10 quiz questions.
Readings must be chosen only from the web search results supplied in the
request; copy their urls exactly, and return an empty list if none fit."""

_CONTRACTS = {
    "pedagogical": PEDAGOGICAL_OUTPUT_CONTRACT,
    "safeguard": SAFEGUARD_OUTPUT_CONTRACT,
    "tutor": TUTOR_OUTPUT_CONTRACT,
}


def system_prompt(agent: str) -> str:
    """Instruction text plus the output contract, as sent to the chat provider."""
    return f"{load_prompt(agent)}\n{_CONTRACTS[agent]}"
