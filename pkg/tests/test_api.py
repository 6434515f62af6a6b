import json
from datetime import date
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from patentprune.jsonio import read_json
from patentprune.service.api import make_app

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
EVAL = "2026-01-15"


def create_body(run_id="api-run"):
    return {
        "run_id": run_id,
        "patents": str(FIXTURES / "sandisk_mini.jsonl"),
        "evaluation_date": EVAL,
        "aliases": str(FIXTURES / "aliases.csv"),
        "gni": str(FIXTURES / "gni.csv"),
        "market": str(FIXTURES / "market.json"),
        "needs_corpus": str(FIXTURES / "needs_corpus.jsonl"),
        "patterns": str(FIXTURES / "patterns.txt"),
        "broad_terms": str(FIXTURES / "broad_terms.txt"),
        "params_config": str(FIXTURES / "params.toml"),
        "profiles_config": str(FIXTURES / "profiles.toml"),
        "model": str(FIXTURES / "model.json"),
        "profile": "QuickMonetization",
        "seed": 7,
    }


@pytest.fixture
def client(tmp_path):
    return TestClient(make_app(tmp_path / "runs"))


def expected():
    return read_json(FIXTURES / "expected.json")


class TestErrors:
    def test_unknown_run_404(self, client):
        assert client.get("/api/runs/nope").status_code == 404

    def test_unknown_gate_404(self, client):
        client.post("/api/runs", json=create_body())
        assert client.get("/api/runs/api-run/gates/PostRanking").status_code == 404

    def test_create_validation_422(self, client):
        body = create_body()
        body["patents"] = "/does/not/exist.jsonl"
        assert client.post("/api/runs", json=body).status_code == 422

    def test_review_resolved_gate_409(self, client):
        client.post("/api/runs", json=create_body())
        client.post("/api/runs/api-run/selection", json={"categories": []})
        approve = {"action": "Approved", "reviewer": "r"}
        assert client.post("/api/runs/api-run/gates/PostRanking", json=approve).status_code == 200
        second = client.post("/api/runs/api-run/gates/PostRanking", json=approve)
        assert second.status_code == 409

    def test_stale_version_409(self, client):
        client.post("/api/runs", json=create_body())
        client.post("/api/runs/api-run/selection", json={"categories": []})
        res = client.post(
            "/api/runs/api-run/gates/PostRanking",
            json={"action": "Approved", "reviewer": "r", "version": 99},
        )
        assert res.status_code == 409

    def test_unknown_item_422(self, client):
        client.post("/api/runs", json=create_body())
        client.post("/api/runs/api-run/selection", json={"categories": []})
        res = client.post(
            "/api/runs/api-run/gates/PostRanking",
            json={
                "action": "Amended",
                "verdicts": [{"item_id": "GHOST", "verdict": "Drop"}],
            },
        )
        assert res.status_code == 422


class TestWalkthrough:
    def test_console_flow_reaches_complete(self, client):
        # create -> categorized
        res = client.post("/api/runs", json=create_body())
        assert res.status_code == 200
        assert res.json()["phase"] == "Categorized"

        # dashboard, default and what-if profile
        cats = client.get("/api/runs/api-run/categories").json()
        assert any(row["key"] == expected()["planted_category"] for row in cats)
        whatif = client.get(
            "/api/runs/api-run/categories", params={"profile": "AggressiveGrowth"}
        ).json()
        assert {row["key"] for row in whatif} == {row["key"] for row in cats}

        # selection triggers ranking + gate
        res = client.post("/api/runs/api-run/selection", json={"categories": []})
        assert res.json()["phase"] == "GatePostRanking"

        ranking = client.get("/api/runs/api-run/ranking").json()
        assert len(ranking["ranking"]) == 171
        assert set(pid for pid, _ in ranking["ranking"][:12]) == set(expected()["planted_ids"])
        assert ranking["features"]  # per-patent breakdown for the review table

        # what-if re-rank leaves server state alone
        preview = client.get(
            "/api/runs/api-run/ranking", params={"profile": "DefensiveMoat"}
        ).json()
        assert preview["what_if"] is True
        assert client.get("/api/runs/api-run").json()["phase"] == "GatePostRanking"

        gate = client.get("/api/runs/api-run/gates/PostRanking").json()
        res = client.post(
            "/api/runs/api-run/gates/PostRanking",
            json={"action": "Approved", "reviewer": "ip-strategist",
                  "version": gate["version"]},
        )
        assert res.json()["phase"] == "GatePostMatch"

        matches = client.get("/api/runs/api-run/matches").json()
        assert matches[0]["fit_score"] >= 95

        gate = client.get("/api/runs/api-run/gates/PostMatch").json()
        res = client.post(
            "/api/runs/api-run/gates/PostMatch",
            json={"action": "Approved", "reviewer": "licensing-exec",
                  "version": gate["version"]},
        )
        assert res.json()["phase"] == "GateFinal"

        reports = client.get("/api/runs/api-run/reports").json()
        assert len(reports) == 1
        assert reports[0]["target_match"]["entity"] == expected()["planted_need_entity"]
        assert "Strategic Actions" in reports[0]["text"]

        gate = client.get("/api/runs/api-run/gates/FinalOntology").json()
        res = client.post(
            "/api/runs/api-run/gates/FinalOntology",
            json={"action": "Approved", "reviewer": "attorney",
                  "version": gate["version"]},
        )
        assert res.json()["phase"] == "Complete"

        runs = client.get("/api/runs").json()
        assert runs == [{"run_id": "api-run", "phase": "Complete",
                         "profile": "QuickMonetization"}]

    def test_amend_with_regrade_and_export(self, client):
        client.post("/api/runs", json=create_body())
        client.post("/api/runs/api-run/selection", json={"categories": []})
        victim = expected()["planted_ids"][2]
        res = client.post(
            "/api/runs/api-run/gates/PostRanking",
            json={
                "action": "Amended",
                "reviewer": "r",
                "verdicts": [
                    {"item_id": victim, "verdict": "Regrade", "grade": 1, "note": "meh"}
                ],
            },
        )
        assert res.status_code == 200
        out = client.post("/api/runs/api-run/export-labels")
        assert out.status_code == 200
        assert out.json()["rows"] == 1
