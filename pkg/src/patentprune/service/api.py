"""HTTP API over the run store, consumed by the review console.

Reads are pure functions of the run's artifact files and safe to issue
concurrently; mutations funnel through the Service and are serialized per
process.  Error mapping: unknown run/gate -> 404, gate conflicts (already
resolved, stale version, order violations) -> 409, validation -> 422.
"""

from __future__ import annotations

from datetime import date
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..gates import Decision, GateAlreadyResolved, GateOrderViolation, GatesError, UnknownItem
from ..jsonio import read_json, read_jsonl
from .pipeline import PipelineError, RunInputs, Service, UnknownRun


class CreateRunBody(BaseModel):
    run_id: str = ""
    patents: str
    evaluation_date: str
    aliases: str | None = None
    gni: str | None = None
    market: str | None = None
    needs_corpus: str | None = None
    patterns: str | None = None
    broad_terms: str | None = None
    params_config: str | None = None
    profiles_config: str | None = None
    model: str | None = None
    profile: str = "QuickMonetization"
    seed: int = 7


class SelectionBody(BaseModel):
    categories: list[str] = Field(default_factory=list)
    profile: str | None = None


class VerdictBody(BaseModel):
    item_id: str
    verdict: str
    grade: int | None = None
    note: str = ""


class ReviewBody(BaseModel):
    action: str
    reviewer: str = ""
    version: int | None = None
    verdicts: list[VerdictBody] = Field(default_factory=list)


def make_app(runs_dir: str | Path, console_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="patentprune", docs_url=None, redoc_url=None)
    service = Service(runs_dir)

    def _load_run(run_id: str) -> dict[str, Any]:
        try:
            return service.load_run(run_id)
        except UnknownRun as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    def _artifact(run_id: str, name: str) -> Path:
        path = service.run_dir(run_id) / name
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"{name} not available yet")
        return path

    @app.get("/api/runs")
    def list_runs() -> list[dict[str, Any]]:
        return service.list_runs()

    @app.post("/api/runs")
    def create_run(body: CreateRunBody) -> dict[str, Any]:
        try:
            inputs = RunInputs(
                patents=body.patents,
                evaluation_date=date.fromisoformat(body.evaluation_date),
                run_id=body.run_id,
                aliases=body.aliases,
                gni=body.gni,
                market=body.market,
                needs_corpus=body.needs_corpus,
                patterns=body.patterns,
                broad_terms=body.broad_terms,
                params_config=body.params_config,
                profiles_config=body.profiles_config,
                model=body.model,
                profile=body.profile,
                seed=body.seed,
            )
            run = service.create_run(inputs)
            return service.categorize_run(run["run_id"])
        except (PipelineError, ValueError, OSError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str) -> dict[str, Any]:
        return _load_run(run_id)

    @app.get("/api/runs/{run_id}/categories")
    def get_categories(run_id: str, profile: str | None = Query(default=None)) -> list[dict[str, Any]]:
        _load_run(run_id)
        try:
            return service.category_table(run_id, profile)
        except (PipelineError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.post("/api/runs/{run_id}/selection")
    def post_selection(run_id: str, body: SelectionBody) -> dict[str, Any]:
        _load_run(run_id)
        try:
            return service.rank_run(
                run_id,
                select_categories=body.categories or None,
                profile=body.profile,
            )
        except (PipelineError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/api/runs/{run_id}/ranking")
    def get_ranking(run_id: str, profile: str | None = Query(default=None)) -> dict[str, Any]:
        run = _load_run(run_id)
        data = read_json(_artifact(run_id, "ranking.json"))
        if profile:
            try:
                data = {
                    "profile": profile,
                    "selection": data["selection"],
                    "ranking": service.ranking_preview(run_id, profile),
                    "what_if": True,
                }
            except (PipelineError, ValueError) as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        vectors = {
            row["patent_id"]: row
            for row in read_jsonl(_artifact(run_id, "vectors.jsonl"))
        }
        top_ids = [pid for pid, _ in data["ranking"][:50]]
        data["features"] = {pid: vectors[pid] for pid in top_ids if pid in vectors}
        data["phase"] = run["phase"]
        return data

    @app.get("/api/runs/{run_id}/matches")
    def get_matches(run_id: str) -> list[dict[str, Any]]:
        _load_run(run_id)
        return list(read_jsonl(_artifact(run_id, "matches.jsonl")))

    @app.get("/api/runs/{run_id}/reports")
    def get_reports(run_id: str) -> list[dict[str, Any]]:
        _load_run(run_id)
        reports_dir = _artifact(run_id, "reports")
        out = []
        for path in sorted(reports_dir.glob("*.json")):
            report = read_json(path)
            report["text"] = (path.with_suffix(".txt")).read_text(encoding="utf-8")
            out.append(report)
        return out

    @app.get("/api/runs/{run_id}/gates/{gate_id}")
    def get_gate(run_id: str, gate_id: str) -> dict[str, Any]:
        run = _load_run(run_id)
        store = service._gate_store(run)
        gate = store.latest(gate_id)
        if gate is None:
            raise HTTPException(status_code=404, detail=f"gate {gate_id} never opened")
        return gate.to_dict()

    @app.post("/api/runs/{run_id}/gates/{gate_id}")
    def post_gate(run_id: str, gate_id: str, body: ReviewBody) -> dict[str, Any]:
        run = _load_run(run_id)
        store = service._gate_store(run)
        gate = store.latest(gate_id)
        if gate is None:
            raise HTTPException(status_code=404, detail=f"gate {gate_id} never opened")
        if gate.resolved:
            raise HTTPException(
                status_code=409,
                detail=f"gate {gate_id} v{gate.version} is already {gate.state}",
            )
        if body.version is not None and body.version != gate.version:
            raise HTTPException(
                status_code=409,
                detail=f"stale gate version {body.version}; current is {gate.version}",
            )
        try:
            verdicts = [
                Decision(item_id=v.item_id, verdict=v.verdict, grade=v.grade, note=v.note)
                for v in body.verdicts
            ]
            return service.review_gate(
                run_id, gate_id, body.action, verdicts, reviewer=body.reviewer
            )
        except (GateAlreadyResolved, GateOrderViolation) as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except (UnknownItem, GatesError, PipelineError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.post("/api/runs/{run_id}/export-labels")
    def post_export_labels(run_id: str) -> dict[str, Any]:
        _load_run(run_id)
        path = service.export_labels(run_id)
        return {"labels": path.name, "rows": sum(1 for _ in read_jsonl(path))}

    if console_dir is not None and Path(console_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(console_dir), html=True), name="console")

    return app
