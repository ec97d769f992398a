"""HTTP surface: routing, status codes, error mapping, statelessness."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from conftest import make_engine
from pact import consensus, core, service
from pact.service import create_app


@pytest.fixture
def client(tmp_path, engine=None):
    app = create_app(make_engine(tmp_path / "svc"))
    with TestClient(app) as c:
        c.engine = app.state.engine
        yield c


GROUP_BODY = {
    "id": "deal",
    "signatories": [{"id": "alice", "display_name": "Alice"}, {"id": "bob"}],
}


def open_proposal(client, text="service terms\n", **extra):
    client.post("/groups", json=GROUP_BODY)
    resp = client.post("/groups/deal/proposals", json={"text": text, **extra})
    assert resp.status_code == 201, resp.text
    return resp.json()


def vote(client, proposal, signatory_id, vote_value=True, **overrides):
    body = {
        "signatory_id": signatory_id,
        "submitted_hash": proposal["expected_hash"],
        "vote": vote_value,
    }
    body.update(overrides)
    return client.post(f"/proposals/{proposal['id']}/votes", json=body)


def approve_and_finalize(client, text="service terms\n"):
    proposal = open_proposal(client, text)
    for sid in ("alice", "bob"):
        assert vote(client, proposal, sid).status_code == 200
    resp = client.post(f"/proposals/{proposal['id']}/finalize", json={})
    assert resp.status_code == 200, resp.text
    return resp.json()


class TestGroups:
    def test_create_returns_201_with_view(self, client):
        resp = client.post("/groups", json=GROUP_BODY)
        assert resp.status_code == 201
        body = resp.json()
        assert body["id"] == "deal"
        assert [s["id"] for s in body["signatories"]] == ["alice", "bob"]

    def test_get_group(self, client):
        client.post("/groups", json=GROUP_BODY)
        assert client.get("/groups/deal").json()["id"] == "deal"

    def test_unknown_group_is_404(self, client):
        resp = client.get("/groups/ghost")
        assert resp.status_code == 404
        assert resp.json()["code"] == "UNKNOWN_GROUP"

    def test_duplicate_group_is_409(self, client):
        client.post("/groups", json=GROUP_BODY)
        resp = client.post("/groups", json=GROUP_BODY)
        assert resp.status_code == 409
        assert resp.json()["code"] == "DUPLICATE_GROUP"


class TestProposalRoutes:
    def test_open_and_get(self, client):
        proposal = open_proposal(client)
        got = client.get(f"/proposals/{proposal['id']}").json()
        assert got["expected_hash"] == proposal["expected_hash"]
        assert got["tally"] == "pending"

    def test_empty_text_is_409(self, client):
        client.post("/groups", json=GROUP_BODY)
        resp = client.post("/groups/deal/proposals", json={"text": ""})
        assert resp.status_code == 409
        assert resp.json()["code"] == "EMPTY_CONTRACT_TEXT"

    def test_unknown_parent_is_404(self, client):
        client.post("/groups", json=GROUP_BODY)
        resp = client.post(
            "/groups/deal/proposals",
            json={"text": "x\n", "kind": "amendment", "parent_version_id": "f" * 32},
        )
        assert resp.status_code == 404
        assert resp.json()["code"] == "UNKNOWN_PARENT_VERSION"

    def test_second_open_proposal_is_409(self, client):
        open_proposal(client)
        resp = client.post("/groups/deal/proposals", json={"text": "another\n"})
        assert resp.status_code == 409
        assert resp.json()["code"] == "OPEN_PROPOSAL_EXISTS"

    def test_malformed_json_is_400(self, client):
        resp = client.post(
            "/groups/deal/proposals",
            content=b"{not json",
            headers={"content-type": "application/json"},
        )
        assert resp.status_code == 400
        assert resp.json()["code"] == "BAD_REQUEST"

    def test_missing_field_is_400(self, client):
        client.post("/groups", json=GROUP_BODY)
        resp = client.post("/groups/deal/proposals", json={"kind": "original"})
        assert resp.status_code == 400
        assert resp.json()["code"] == "BAD_REQUEST"


class TestVoteRoutes:
    def test_platform_signed_vote(self, client):
        proposal = open_proposal(client)
        resp = vote(client, proposal, "alice")
        assert resp.status_code == 200
        assert resp.json()["submissions"]["alice"]["vote"] is True

    def test_client_signed_vote(self, client):
        proposal = open_proposal(client)
        private_key = client.engine.vault.get("signatory/deal/alice")
        signature = core.sign(
            private_key,
            consensus.vote_message(proposal["id"], proposal["expected_hash"], True),
        )
        resp = vote(client, proposal, "alice", signature=signature)
        assert resp.status_code == 200

    def test_bad_signature_is_409(self, client):
        proposal = open_proposal(client)
        resp = vote(client, proposal, "alice", signature="ab" * 64)
        assert resp.status_code == 409
        assert resp.json()["code"] == "BAD_VOTE_SIGNATURE"

    def test_double_vote_is_409_already_voted(self, client):
        proposal = open_proposal(client)
        vote(client, proposal, "alice")
        resp = vote(client, proposal, "alice")
        assert resp.status_code == 409
        assert resp.json()["code"] == "ALREADY_VOTED"

    def test_non_signatory_is_409(self, client):
        proposal = open_proposal(client)
        resp = vote(client, proposal, "mallory")
        assert resp.status_code == 409
        assert resp.json()["code"] == "NOT_A_SIGNATORY"

    def test_malformed_hash_is_400(self, client):
        proposal = open_proposal(client)
        resp = vote(client, proposal, "alice", submitted_hash="xyz")
        assert resp.status_code == 400
        assert resp.json()["code"] == "DECODE_ERROR"

    def test_unknown_proposal_is_404(self, client):
        resp = client.post(
            "/proposals/ghost-p9/votes",
            json={"signatory_id": "a", "submitted_hash": "0" * 64, "vote": True},
        )
        assert resp.status_code == 404
        assert resp.json()["code"] == "UNKNOWN_PROPOSAL"

    def test_signatory_header_must_match(self, client):
        proposal = open_proposal(client)
        resp = client.post(
            f"/proposals/{proposal['id']}/votes",
            json={
                "signatory_id": "alice",
                "submitted_hash": proposal["expected_hash"],
                "vote": True,
            },
            headers={"X-Signatory-Id": "bob"},
        )
        assert resp.status_code == 400

    def test_matching_header_accepted(self, client):
        proposal = open_proposal(client)
        resp = client.post(
            f"/proposals/{proposal['id']}/votes",
            json={
                "signatory_id": "alice",
                "submitted_hash": proposal["expected_hash"],
                "vote": True,
            },
            headers={"X-Signatory-Id": "alice"},
        )
        assert resp.status_code == 200


class TestFinalizeAndChain:
    def test_fresh_chain_is_genesis_array(self, client):
        body = client.get("/chain").json()
        assert isinstance(body, list)
        assert len(body) == 1
        assert body[0]["index"] == 0

    def test_finalize_appends_block(self, client):
        result = approve_and_finalize(client)
        assert result["block_index"] == 1
        chain = client.get("/chain").json()
        assert len(chain) == 2
        assert chain[1]["contract_id"] == result["version_id"]

    def test_unapproved_finalize_is_409(self, client):
        proposal = open_proposal(client)
        resp = client.post(f"/proposals/{proposal['id']}/finalize", json={})
        assert resp.status_code == 409
        assert resp.json()["code"] == "NOT_APPROVED"

    def test_second_finalize_is_409(self, client):
        result = approve_and_finalize(client)
        resp = client.post(f"/proposals/{result['proposal_id']}/finalize", json={})
        assert resp.status_code == 409
        assert resp.json()["code"] == "ALREADY_FINALIZED"

    def test_chain_verify(self, client):
        approve_and_finalize(client)
        body = client.get("/chain/verify").json()
        assert body["valid"] is True
        assert body["length"] == 2

    def test_history(self, client):
        result = approve_and_finalize(client)
        entries = client.get(f"/contracts/{result['version_id']}/history").json()
        assert len(entries) == 1
        assert entries[0]["version_id"] == result["version_id"]

    def test_history_unknown_is_404(self, client):
        resp = client.get(f"/contracts/{'9' * 32}/history")
        assert resp.status_code == 404
        assert resp.json()["code"] == "UNKNOWN_CONTRACT"


class TestVerifyRoute:
    def test_found(self, client):
        result = approve_and_finalize(client, text="notarized text\n")
        resp = client.post("/verify", json={"text": "notarized text\r\n"})
        body = resp.json()
        assert body["found"] is True
        assert body["version_id"] == result["version_id"]

    def test_not_found(self, client):
        approve_and_finalize(client, text="notarized text\n")
        body = client.post("/verify", json={"text": "forged text\n"}).json()
        assert body["found"] is False
        assert body["digest"] == core.hash_contract("forged text\n")


class TestSimRoute:
    def test_summary_and_determinism(self, client):
        request = {"miner_count": 5, "noise_p": 0.1, "requests": 2000, "seed": 42}
        a = client.post("/sim/run", json=request)
        b = client.post("/sim/run", json=request)
        assert a.status_code == 200
        assert a.json() == b.json()
        assert a.json()["quorum_threshold"] == 3
        assert 0 <= a.json()["truthful_request_failure_rate"] <= 1

    def test_invalid_config_is_400(self, client):
        resp = client.post("/sim/run", json={"miner_count": 5, "noise_p": 2.0})
        assert resp.status_code == 400
        assert resp.json()["code"] == "BAD_REQUEST"


SCRIPT = [
    ("POST", "/groups", GROUP_BODY),
    ("POST", "/groups/deal/proposals", {"text": "replayable terms\n"}),
    ("GET", "/proposals/deal-p1", None),
    (
        "POST",
        "/proposals/deal-p1/votes",
        {
            "signatory_id": "alice",
            "submitted_hash": core.hash_contract("replayable terms\n"),
            "vote": True,
        },
    ),
    (
        "POST",
        "/proposals/deal-p1/votes",
        {
            "signatory_id": "bob",
            "submitted_hash": core.hash_contract("replayable terms\n"),
            "vote": True,
        },
    ),
    ("POST", "/proposals/deal-p1/finalize", {}),
    ("GET", "/chain", None),
    ("GET", "/chain/verify", None),
]


def run_script(tmp_path, name) -> list:
    app = create_app(make_engine(tmp_path / name))
    responses = []
    with TestClient(app) as client:
        for method, url, body in SCRIPT:
            resp = client.request(method, url, json=body)
            responses.append((resp.status_code, resp.json()))
    return responses


class TestStatelessness:
    def test_replaying_requests_reproduces_responses(self, tmp_path):
        assert run_script(tmp_path, "a") == run_script(tmp_path, "b")


class TestSecrecy:
    def test_no_private_key_in_any_response(self, client):
        proposal = open_proposal(client)
        for sid in ("alice", "bob"):
            vote(client, proposal, sid)
        client.post(f"/proposals/{proposal['id']}/finalize", json={})
        payloads = [
            client.get("/groups/deal").text,
            client.get(f"/proposals/{proposal['id']}").text,
            client.get("/chain").text,
            client.get("/chain/verify").text,
        ]
        blob = json.dumps(payloads)
        for private_key in client.engine.vault.keys.values():
            assert private_key not in blob


class TestEnvFactory:
    def test_app_from_env_builds_engine(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PACT_DATA_DIR", str(tmp_path / "env"))
        monkeypatch.setenv("PACT_DIFFICULTY", "1")
        monkeypatch.setenv("PACT_MINERS", "3")
        monkeypatch.setenv("PACT_KEY_SEED", "factory-test")
        app = service.app_from_env()
        with TestClient(app) as c:
            report = c.get("/chain/verify").json()
        assert report == {"valid": True, "first_bad_index": None, "rule": None, "length": 1}

    def test_missing_data_dir_refuses(self, monkeypatch):
        monkeypatch.delenv("PACT_DATA_DIR", raising=False)
        with pytest.raises(RuntimeError):
            service.engine_from_env()
