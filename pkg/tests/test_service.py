"""HTTP API: endpoints, event streaming, approval, bundle serving, hygiene."""
from __future__ import annotations

import json
import time

import pytest
from fastapi.testclient import TestClient

from xrauthor.idclock import SeededIdClock
from xrauthor.pipeline import JobEvent, count_stage_executions
from xrauthor.providers import ProviderConfig
from xrauthor.service import create_app

from conftest import HEART_PROMPT, scenario_dir

FAKE_SECRET = "sk-VERY-SECRET-DO-NOT-LEAK-1234"


def heart_body(**overrides) -> dict:
    body = {
        "prompt_text": HEART_PROMPT,
        "grade_band": "6-8",
        "subject": "General",
        "topic": "",
        "require_approval": False,
        "max_safety_attempts": 3,
    }
    body.update(overrides)
    return body


@pytest.fixture
def client(tmp_path):
    config = ProviderConfig(
        mode="mock",
        fixture_dir=scenario_dir("default"),
        chat_api_key=FAKE_SECRET,  # must never appear in any response
    )
    app = create_app(
        data_dir=tmp_path / "data",
        provider_config=config,
        clock=SeededIdClock(5),
        max_jobs=2,
    )
    with TestClient(app) as test_client:
        yield test_client


def wait_terminal(client: TestClient, job_id: str, timeout: float = 10.0) -> dict:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        view = client.get(f"/api/jobs/{job_id}").json()
        if view["state"] in ("complete", "failed"):
            return view
        time.sleep(0.02)
    raise AssertionError(f"job {job_id} never reached a terminal state")


class TestSubmission:
    def test_heart_request_reaches_complete(self, client):
        response = client.post("/api/jobs", json=heart_body())
        assert response.status_code == 201
        job_id = response.json()["job_id"]
        view = wait_terminal(client, job_id)
        assert view["state"] == "complete"
        assert view["bundle_url"] == f"/api/bundles/{job_id}"
        assert view["tutor_pack"]["quiz"]

    def test_bundle_url_absent_until_complete(self, client):
        job_id = client.post("/api/jobs", json=heart_body()).json()["job_id"]
        view = client.get(f"/api/jobs/{job_id}").json()
        if view["state"] != "complete":
            assert view["bundle_url"] is None
        wait_terminal(client, job_id)

    def test_invalid_grade_band_is_400_with_field(self, client):
        response = client.post("/api/jobs", json=heart_body(grade_band="13"))
        assert response.status_code == 400
        assert any(item["field"] == "grade_band" for item in response.json()["detail"])

    def test_blank_prompt_is_400(self, client):
        response = client.post("/api/jobs", json=heart_body(prompt_text="   "))
        assert response.status_code == 400

    def test_duplicate_submissions_get_new_ids(self, client):
        first = client.post("/api/jobs", json=heart_body()).json()["job_id"]
        second = client.post("/api/jobs", json=heart_body()).json()["job_id"]
        assert first != second
        wait_terminal(client, first)
        wait_terminal(client, second)

    def test_unknown_job_404(self, client):
        assert client.get("/api/jobs/ghost").status_code == 404


class TestEventStream:
    def test_stream_terminates_after_terminal_event(self, client):
        job_id = client.post("/api/jobs", json=heart_body()).json()["job_id"]
        response = client.get(f"/api/jobs/{job_id}/events")
        assert response.status_code == 200
        lines = [json.loads(line) for line in response.text.strip().splitlines()]
        assert lines[0]["stage"] == "received"
        assert lines[-1]["kind"] == "stage_entered"
        assert lines[-1]["stage"] in ("complete", "failed")
        timestamps = [line["timestamp"] for line in lines]
        assert timestamps == sorted(timestamps)

    def test_offset_resumption(self, client):
        job_id = client.post("/api/jobs", json=heart_body()).json()["job_id"]
        full = client.get(f"/api/jobs/{job_id}/events").text.strip().splitlines()
        resumed = client.get(f"/api/jobs/{job_id}/events?offset=4").text.strip().splitlines()
        assert resumed == full[4:]

    def test_stream_on_finished_job_replays_and_closes(self, client):
        job_id = client.post("/api/jobs", json=heart_body()).json()["job_id"]
        wait_terminal(client, job_id)
        lines = client.get(f"/api/jobs/{job_id}/events").text.strip().splitlines()
        assert json.loads(lines[-1])["stage"] == "complete"

    def test_unknown_job_stream_404(self, client):
        assert client.get("/api/jobs/ghost/events").status_code == 404


class TestApproval:
    def submit_gated(self, client) -> str:
        body = heart_body(require_approval=True)
        job_id = client.post("/api/jobs", json=body).json()["job_id"]
        deadline = time.monotonic() + 10
        while time.monotonic() < deadline:
            view = client.get(f"/api/jobs/{job_id}").json()
            if view["state"] == "awaiting_approval":
                return job_id
            time.sleep(0.02)
        raise AssertionError("job never paused for approval")

    def test_approve_resumes_to_completion(self, client):
        job_id = self.submit_gated(client)
        response = client.post(f"/api/jobs/{job_id}/approval", json={"decision": "approve"})
        assert response.status_code == 200
        assert response.json()["state"] == "generating"
        view = wait_terminal(client, job_id)
        assert view["state"] == "complete"

    def test_reject_fails_job(self, client):
        job_id = self.submit_gated(client)
        response = client.post(f"/api/jobs/{job_id}/approval", json={"decision": "reject"})
        assert response.status_code == 200
        view = client.get(f"/api/jobs/{job_id}").json()
        assert view["state"] == "failed"
        assert view["failure_reason"] == "teacher_rejected"

    def test_double_approval_conflicts(self, client):
        job_id = self.submit_gated(client)
        assert client.post(f"/api/jobs/{job_id}/approval", json={"decision": "approve"}).status_code == 200
        second = client.post(f"/api/jobs/{job_id}/approval", json={"decision": "approve"})
        assert second.status_code == 409
        wait_terminal(client, job_id)

    def test_approval_on_completed_job_conflicts(self, client):
        job_id = client.post("/api/jobs", json=heart_body()).json()["job_id"]
        wait_terminal(client, job_id)
        response = client.post(f"/api/jobs/{job_id}/approval", json={"decision": "approve"})
        assert response.status_code == 409

    def test_invalid_edited_spec_is_400(self, client):
        job_id = self.submit_gated(client)
        bad_spec = {"core_concept": "x"}
        response = client.post(
            f"/api/jobs/{job_id}/approval",
            json={"decision": "approve", "edited_spec": bad_spec},
        )
        assert response.status_code == 400
        client.post(f"/api/jobs/{job_id}/approval", json={"decision": "reject"})

    def test_unknown_job_404(self, client):
        response = client.post("/api/jobs/ghost/approval", json={"decision": "approve"})
        assert response.status_code == 404


class TestBundles:
    def completed_job(self, client) -> str:
        job_id = client.post("/api/jobs", json=heart_body()).json()["job_id"]
        wait_terminal(client, job_id)
        return job_id

    def test_model_glb_content_type(self, client):
        job_id = self.completed_job(client)
        response = client.get(f"/api/bundles/{job_id}/model.glb")
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("model/gltf-binary")
        assert response.content[:4] == b"glTF"

    def test_manifest_json(self, client):
        job_id = self.completed_job(client)
        response = client.get(f"/api/bundles/{job_id}/manifest.json")
        assert response.status_code == 200
        assert response.json()["bundle_id"] == job_id

    def test_range_request(self, client):
        job_id = self.completed_job(client)
        response = client.get(
            f"/api/bundles/{job_id}/model.glb", headers={"Range": "bytes=4-7"}
        )
        assert response.status_code == 206
        assert len(response.content) == 4
        assert response.headers["content-range"].startswith("bytes 4-7/")

    def test_traversal_blocked(self, client):
        job_id = self.completed_job(client)
        response = client.get(f"/api/bundles/{job_id}/..%2F..%2Fjob.json")
        assert response.status_code == 403
        response = client.get(f"/api/bundles/{job_id}/%2E%2E%2Fjob.json")
        assert response.status_code == 403

    def test_unexpected_name_404(self, client):
        job_id = self.completed_job(client)
        assert client.get(f"/api/bundles/{job_id}/evil.bin").status_code == 404

    def test_missing_bundle_404(self, client):
        assert client.get("/api/bundles/ghost/model.glb").status_code == 404


class TestHygieneAndLiveness:
    def test_no_response_contains_credentials(self, client):
        job_id = client.post("/api/jobs", json=heart_body()).json()["job_id"]
        wait_terminal(client, job_id)
        bodies = [
            client.get(f"/api/jobs/{job_id}").text,
            client.get(f"/api/jobs/{job_id}/events").text,
            client.get(f"/api/bundles/{job_id}/manifest.json").text,
            client.get(f"/api/bundles/{job_id}/tutor.json").text,
        ]
        for body in bodies:
            assert FAKE_SECRET not in body

    def test_terminal_within_stage_budget(self, client):
        job_id = client.post("/api/jobs", json=heart_body()).json()["job_id"]
        view = wait_terminal(client, job_id)
        lines = client.get(f"/api/jobs/{job_id}/events").text.strip().splitlines()
        events = [JobEvent.model_validate(json.loads(line)) for line in lines]
        budget = 3 + 2 * heart_body()["max_safety_attempts"]
        assert count_stage_executions(events) <= budget
        assert view["state"] in ("complete", "failed")
