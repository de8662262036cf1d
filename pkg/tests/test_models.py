"""Domain type invariants."""
from __future__ import annotations

import pydantic
import pytest

from xrauthor.models import (
    Annotation,
    AssetMeta,
    AuthoringRequest,
    BoundingBox,
    ContentSpec,
    CRITERION_ORDER,
    QuizQuestion,
    Reading,
    SafetyVerdict,
    validate_model,
)
from xrauthor.errors import ValidationError

import doubles


class TestAuthoringRequest:
    def test_valid(self, heart_request):
        assert heart_request.max_safety_attempts == 3

    @pytest.mark.parametrize("prompt", ["", "   ", "\n\t"])
    def test_blank_prompt_rejected(self, prompt):
        with pytest.raises(pydantic.ValidationError):
            AuthoringRequest(prompt_text=prompt, grade_band="6-8")

    def test_zero_attempts_rejected(self):
        with pytest.raises(pydantic.ValidationError):
            AuthoringRequest(prompt_text="x", grade_band="6-8", max_safety_attempts=0)

    def test_bad_grade_band_rejected(self):
        with pytest.raises(ValidationError, match="grade_band"):
            validate_model(AuthoringRequest, {"prompt_text": "x", "grade_band": "13"})


class TestContentSpec:
    def test_valid(self):
        spec = doubles.make_spec()
        assert spec.core_concept == "human heart anatomy"

    def test_prompt_must_mention_every_feature(self):
        with pytest.raises(pydantic.ValidationError, match="missing"):
            doubles.make_spec(refined_prompt="a heart with four chambers and heart valves")

    def test_feature_match_is_case_insensitive(self):
        spec = doubles.make_spec(
            refined_prompt="A heart with FOUR CHAMBERS, Heart Valves, and the AORTA."
        )
        assert spec.required_visual_features == doubles.FEATURES

    def test_objectives_required(self):
        with pytest.raises(pydantic.ValidationError):
            doubles.make_spec(learning_objectives=[])

    def test_feature_count_bounded(self):
        features = [f"part {i}" for i in range(13)]
        prompt = "model with " + ", ".join(features)
        with pytest.raises(pydantic.ValidationError):
            doubles.make_spec(required_visual_features=features, refined_prompt=prompt)


class TestSafetyVerdict:
    def test_approved_requires_all_pass(self):
        verdict = doubles.make_verdict()
        assert verdict.approved and not verdict.failing()

    def test_rejection_forces_feedback(self):
        payload = doubles.verdict_payload(failing={"no_bias": "bad"}, feedback="")
        with pytest.raises(pydantic.ValidationError, match="revision_feedback"):
            SafetyVerdict.model_validate(payload)

    def test_approved_must_match_criteria(self):
        payload = doubles.verdict_payload(failing={"no_bias": "bad"}, feedback="fix it")
        payload["approved"] = True
        payload["revision_feedback"] = ""
        with pytest.raises(pydantic.ValidationError, match="approved"):
            SafetyVerdict.model_validate(payload)

    def test_missing_criterion_rejected(self):
        payload = doubles.verdict_payload()
        payload["criteria"] = payload["criteria"][:4]
        with pytest.raises(pydantic.ValidationError, match="exactly once"):
            SafetyVerdict.model_validate(payload)

    def test_duplicate_criterion_rejected(self):
        payload = doubles.verdict_payload()
        payload["criteria"][1] = dict(payload["criteria"][0])
        with pytest.raises(pydantic.ValidationError):
            SafetyVerdict.model_validate(payload)

    def test_extra_criterion_rejected(self):
        payload = doubles.verdict_payload()
        payload["criteria"].append(
            {"key": "age_appropriateness", "passed": True, "rationale": "dup"}
        )
        with pytest.raises(pydantic.ValidationError):
            SafetyVerdict.model_validate(payload)

    def test_unknown_criterion_key_rejected(self):
        payload = doubles.verdict_payload()
        payload["criteria"][0]["key"] = "vibes"
        with pytest.raises(pydantic.ValidationError):
            SafetyVerdict.model_validate(payload)

    def test_criteria_normalized_to_canonical_order(self):
        payload = doubles.verdict_payload()
        payload["criteria"].reverse()
        verdict = SafetyVerdict.model_validate(payload)
        assert [c.key for c in verdict.criteria] == list(CRITERION_ORDER)

    def test_empty_rationale_rejected(self):
        payload = doubles.verdict_payload()
        payload["criteria"][0]["rationale"] = ""
        with pytest.raises(pydantic.ValidationError):
            SafetyVerdict.model_validate(payload)


class TestTutorTypes:
    def test_quiz_index_in_range(self):
        with pytest.raises(pydantic.ValidationError, match="out of range"):
            QuizQuestion(stem="?", choices=["a", "b", "c", "d"], correct_index=7)

    def test_quiz_choices_distinct(self):
        with pytest.raises(pydantic.ValidationError, match="distinct"):
            QuizQuestion(stem="?", choices=["a", "a"], correct_index=0)

    def test_quiz_choice_count(self):
        with pytest.raises(pydantic.ValidationError):
            QuizQuestion(stem="?", choices=["only"], correct_index=0)

    def test_anchor_unanchored_string(self):
        note = Annotation(label="x", body="y", anchor="unanchored")
        assert note.anchor is None

    def test_anchor_out_of_unit_cube(self):
        with pytest.raises(pydantic.ValidationError):
            Annotation(label="x", anchor=(0.5, 1.5, 0.5))

    def test_reading_url_must_have_host(self):
        with pytest.raises(pydantic.ValidationError, match="scheme and host"):
            Reading(title="t", url="not-a-url")

    def test_tutor_pack_roundtrip(self):
        pack = doubles.make_tutor_pack(["https://example.org/a"])
        assert pack.readings[0].url == "https://example.org/a"


class TestAssetMeta:
    def _meta(self, **overrides):
        data = {
            "byte_length": 100,
            "gltf_version": 2,
            "mesh_count": 1,
            "triangle_count": 1,
            "bounding_box": {"min": [0, 0, 0], "max": [1, 1, 1]},
            "sha256": "0" * 64,
        }
        data.update(overrides)
        return AssetMeta.model_validate(data)

    def test_valid(self):
        assert self._meta().gltf_version == 2

    def test_version_must_be_two(self):
        with pytest.raises(pydantic.ValidationError):
            self._meta(gltf_version=1)

    def test_minimum_size(self):
        with pytest.raises(pydantic.ValidationError):
            self._meta(byte_length=20)

    def test_bbox_ordering(self):
        with pytest.raises(pydantic.ValidationError):
            BoundingBox(min=(0, 2, 0), max=(1, 1, 1))
