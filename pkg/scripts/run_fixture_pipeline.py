#!/usr/bin/env python3
"""End-to-end demo on the synthetic fixture portfolio.

Runs the whole pipeline with auto-approved gates into ./runs/ and prints the
funnel, the top matches, and the rendered strategic report.  Useful as a
smoke test and as a template for wiring real data.

Run from the repository root:  python scripts/run_fixture_pipeline.py
"""

from __future__ import annotations

import shutil
from datetime import date
from pathlib import Path

from patentprune.jsonio import read_json, read_jsonl
from patentprune.service import RunInputs, Service

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
RUN_ID = "fixture-demo"


def main() -> None:
    runs_dir = ROOT / "runs"
    if (runs_dir / RUN_ID).exists():
        shutil.rmtree(runs_dir / RUN_ID)

    service = Service(runs_dir)
    inputs = RunInputs(
        patents=str(FIXTURES / "sandisk_mini.jsonl"),
        evaluation_date=date(2026, 1, 15),
        run_id=RUN_ID,
        aliases=str(FIXTURES / "aliases.csv"),
        gni=str(FIXTURES / "gni.csv"),
        market=str(FIXTURES / "market.json"),
        needs_corpus=str(FIXTURES / "needs_corpus.jsonl"),
        patterns=str(FIXTURES / "patterns.txt"),
        broad_terms=str(FIXTURES / "broad_terms.txt"),
        params_config=str(FIXTURES / "params.toml"),
        profiles_config=str(FIXTURES / "profiles.toml"),
        model=str(FIXTURES / "model.json"),
        profile="QuickMonetization",
        seed=7,
    )
    run = service.run_pipeline(inputs, auto_approve=True)
    run_dir = service.run_dir(RUN_ID)

    portfolio = read_json(run_dir / "portfolio.json")
    ranking = read_json(run_dir / "ranking.json")["ranking"]
    matches = list(read_jsonl(run_dir / "matches.jsonl"))
    pruned = read_json(run_dir / "pruned.json")

    print(f"run {RUN_ID}: {run['phase']}")
    print(f"funnel: {portfolio['ingested_count']} ingested "
          f"-> {len(portfolio['portfolio']['records'])} in force "
          f"-> {len(ranking)} ranked -> 25 reviewed "
          f"-> {len(pruned['patent_ids'])} pruned")
    print("\ntop of ranking:")
    for i, (pid, score) in enumerate(ranking[:12], start=1):
        print(f"  {i:>2}. {pid}  {score:.4f}")
    print("\ntop matches:")
    for m in matches[:5]:
        print(f"  {m['patent_id']} -> {m['need_id']}  fit {m['fit_score']}/100")
    report_txt = sorted((run_dir / "reports").glob("*.txt"))[0]
    print("\n" + report_txt.read_text(encoding="utf-8"))


if __name__ == "__main__":
    main()
