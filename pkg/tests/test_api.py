import base64
import json
import time

import pytest
from fastapi.testclient import TestClient

from conftest import ALICE_TOKEN, BOB_TOKEN, ORG_TOKEN
from optjudge.api import create_app
from test_service import TINY_ANSWER, TINY_UFLP, tiny_problem


def auth(token):
    return {"Authorization": f"Bearer {token}"}


MANIFEST = {
    "problem_id": "api-prob",
    "title": "via api",
    "direction": "MINIMIZE",
    "checker": "UFLP",
    "limits": {
        "cpu_seconds": 5,
        "wall_seconds": 10,
        "memory_bytes": 256 << 20,
        "output_bytes": 1 << 20,
        "disk_bytes": 1 << 20,
    },
}


@pytest.fixture
def client(make_service):
    svc = make_service()
    with TestClient(create_app(svc)) as c:
        c.service = svc
        yield c


def wait_finished(client, sid, token=ALICE_TOKEN, timeout=30):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        view = client.get(f"/api/v1/submissions/{sid}", headers=auth(token)).json()
        if view["finished"]:
            return view
        time.sleep(0.05)
    raise AssertionError("submission did not finish")


# ---------------------------------------------------------------------------
# auth and error kinds

def test_health_needs_no_token(client):
    r = client.get("/api/v1/health")
    assert r.status_code == 200 and r.json()["status"] == "ok"


def test_missing_token_is_401(client):
    r = client.get("/api/v1/problems")
    assert r.status_code == 401
    assert r.json()["error"]["kind"] == "BadToken"


def test_unknown_token_is_401(client):
    r = client.get("/api/v1/problems", headers=auth("nope"))
    assert r.status_code == 401


def test_contestant_cannot_administer(client):
    r = client.post("/api/v1/problems", json=MANIFEST, headers=auth(ALICE_TOKEN))
    assert r.status_code == 403
    assert r.json()["error"]["kind"] == "WrongRole"


def test_organizer_cannot_submit(client):
    tiny_problem(client.service, "sub-prob")
    r = client.post("/api/v1/submissions", json=submit_payload(), headers=auth(ORG_TOKEN))
    assert r.status_code == 403
    assert r.json()["error"]["kind"] == "WrongRole"


def test_unknown_problem_is_404(client):
    r = client.get("/api/v1/problems/ghost/leaderboard", headers=auth(ALICE_TOKEN))
    assert r.status_code == 404
    assert r.json()["error"]["kind"] == "UnknownProblem"


def test_bad_manifest_is_422(client):
    r = client.post(
        "/api/v1/problems",
        json={"problem_id": "x", "direction": "SIDEWAYS"},
        headers=auth(ORG_TOKEN),
    )
    assert r.status_code == 422


# ---------------------------------------------------------------------------
# organizer flow

def test_problem_and_test_upload_flow(client):
    r = client.post("/api/v1/problems", json=MANIFEST, headers=auth(ORG_TOKEN))
    assert r.status_code == 201 and r.json() == {"problem_id": "api-prob"}

    r = client.put(
        "/api/v1/problems/api-prob/tests/pub-0",
        params={"visibility": "public", "best_known": "2"},
        content=TINY_UFLP,
        headers=auth(ORG_TOKEN),
    )
    assert r.status_code == 200
    assert len(r.json()["sha256"]) == 64

    r = client.put(
        "/api/v1/problems/api-prob/tests/bad",
        params={"visibility": "sideways"},
        content=TINY_UFLP,
        headers=auth(ORG_TOKEN),
    )
    assert r.status_code == 422

    r = client.put(
        "/api/v1/problems/api-prob/tests/bad",
        params={"visibility": "public"},
        content=b"not an instance",
        headers=auth(ORG_TOKEN),
    )
    assert r.status_code == 422

    r = client.post("/api/v1/problems", json=MANIFEST, headers=auth(ORG_TOKEN))
    assert r.status_code == 422  # duplicate problem_id


def test_finalize_conflicts(client):
    tiny_problem(client.service, "fin-prob")
    r = client.get(
        "/api/v1/problems/fin-prob/leaderboard",
        params={"scope": "final"},
        headers=auth(ALICE_TOKEN),
    )
    assert r.status_code == 409
    assert r.json()["error"]["kind"] == "NotFinalized"

    r = client.post("/api/v1/problems/fin-prob/finalize", headers=auth(ORG_TOKEN))
    assert r.status_code == 200 and r.json()["phase"] == "FINALIZED"

    r = client.post("/api/v1/problems/fin-prob/finalize", headers=auth(ORG_TOKEN))
    assert r.status_code == 409
    assert r.json()["error"]["kind"] == "AlreadyFinalized"


# ---------------------------------------------------------------------------
# submission intake

def submit_payload(payload=TINY_ANSWER, problem_id="sub-prob", kind="SOURCE", lang="python3"):
    return {
        "problem_id": problem_id,
        "kind": kind,
        "language_profile": lang,
        "payload": base64.b64encode(payload).decode(),
    }


def test_submission_roundtrip_with_redaction(client):
    tiny_problem(client.service, "sub-prob")
    r = client.post("/api/v1/submissions", json=submit_payload(), headers=auth(ALICE_TOKEN))
    assert r.status_code == 202
    sid = r.json()["submission_id"]

    view = wait_finished(client, sid)
    assert view["aggregate_status"] == "ACCEPTED"
    assert view["public_score"] == "1"
    assert view["relative_points"] == "100"
    assert [row["test_id"] for row in view["public_results"]] == ["pub-0"]
    row = view["public_results"][0]
    assert row["status"] == "OK" and row["objective"] == "2" and row["score"] == "1"
    assert view["private_summary"] == {"total": 1, "evaluated": 1, "running": 0}

    # the contestant serialization never names private tests
    assert "prv-" not in json.dumps(view)

    # the owning contestant is the only contestant who can read it
    r = client.get(f"/api/v1/submissions/{sid}", headers=auth(BOB_TOKEN))
    assert r.status_code == 403
    assert r.json()["error"]["kind"] == "NotOwner"

    # organizers see private details
    org = client.get(f"/api/v1/submissions/{sid}", headers=auth(ORG_TOKEN)).json()
    assert [row["test_id"] for row in org["private_results"]] == ["prv-0"]
    assert org["total_score"] == "2"


def test_submission_validation_errors(client):
    tiny_problem(client.service, "sub-prob")
    bad_kind = submit_payload() | {"kind": "TELEPATHY"}
    assert client.post("/api/v1/submissions", json=bad_kind, headers=auth(ALICE_TOKEN)).status_code == 422

    bad_b64 = submit_payload() | {"payload": "!!!"}
    assert client.post("/api/v1/submissions", json=bad_b64, headers=auth(ALICE_TOKEN)).status_code == 422

    bad_lang = submit_payload(lang="cobol")
    assert client.post("/api/v1/submissions", json=bad_lang, headers=auth(ALICE_TOKEN)).status_code == 422

    ghost = submit_payload(problem_id="ghost")
    assert client.post("/api/v1/submissions", json=ghost, headers=auth(ALICE_TOKEN)).status_code == 404

    unknown = client.get("/api/v1/submissions/s999", headers=auth(ALICE_TOKEN))
    assert unknown.status_code == 404


def test_queue_full_is_429(make_service):
    svc = make_service(queue_capacity=1)
    tiny_problem(svc, "sub-prob")
    with TestClient(create_app(svc)) as client:
        r = client.post("/api/v1/submissions", json=submit_payload(), headers=auth(ALICE_TOKEN))
        assert r.status_code == 429
        assert r.json()["error"]["kind"] == "QueueFull"


def test_submit_to_finalized_problem_is_409(client):
    tiny_problem(client.service, "sub-prob")
    client.post("/api/v1/problems/sub-prob/finalize", headers=auth(ORG_TOKEN))
    r = client.post("/api/v1/submissions", json=submit_payload(), headers=auth(ALICE_TOKEN))
    assert r.status_code == 409
    assert r.json()["error"]["kind"] == "Finalized"


# ---------------------------------------------------------------------------
# boards

def test_leaderboard_and_progress_payloads(client):
    tiny_problem(client.service, "sub-prob")
    r = client.post("/api/v1/submissions", json=submit_payload(), headers=auth(ALICE_TOKEN))
    wait_finished(client, r.json()["submission_id"])

    board = client.get("/api/v1/problems/sub-prob/leaderboard", headers=auth(BOB_TOKEN)).json()
    assert board["scope"] == "public" and board["phase"] == "RUNNING"
    assert board["entries"][0]["contestant_id"] == "alice"
    assert board["entries"][0]["relative_points"] == "100"
    assert board["entries"][0]["rank"] == 1

    prog = client.get("/api/v1/problems/sub-prob/progress", headers=auth(BOB_TOKEN)).json()
    assert len(prog["points"]) == 1
    assert prog["points"][0]["is_new_best"] is True
    assert prog["points"][0]["relative_points"] == "100"

    bad_scope = client.get(
        "/api/v1/problems/sub-prob/leaderboard",
        params={"scope": "secret"},
        headers=auth(BOB_TOKEN),
    )
    assert bad_scope.status_code == 422


def test_final_board_is_byte_stable(client):
    tiny_problem(client.service, "sub-prob")
    r = client.post("/api/v1/submissions", json=submit_payload(), headers=auth(ALICE_TOKEN))
    wait_finished(client, r.json()["submission_id"])
    client.post("/api/v1/problems/sub-prob/finalize", headers=auth(ORG_TOKEN))
    reads = [
        client.get(
            "/api/v1/problems/sub-prob/leaderboard",
            params={"scope": "final"},
            headers=auth(ALICE_TOKEN),
        ).content
        for _ in range(3)
    ]
    assert reads[0] == reads[1] == reads[2]


def test_problem_listing(client):
    tiny_problem(client.service, "sub-prob")
    probs = client.get("/api/v1/problems", headers=auth(ALICE_TOKEN)).json()["problems"]
    assert probs[0]["problem_id"] == "sub-prob"
    assert probs[0]["public_tests"] == 1 and probs[0]["private_tests"] == 1
