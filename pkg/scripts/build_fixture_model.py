#!/usr/bin/env python3
"""Train and bundle the fixture ranking model (fixtures/model.json).

Unlike make_fixtures.py this uses the engine itself: the bundled model is a
product of the trainer, not an oracle.  Deterministic (seed 7), so the
committed file is reproducible byte-for-byte.

Run from the repository root after make_fixtures.py.
"""

from __future__ import annotations

from datetime import date
from pathlib import Path

from patentprune.config import load_engine_config, load_gni_table, load_market_data
from patentprune.corpus import ingest_portfolio, verify_legal_status
from patentprune.jsonio import read_jsonl
from patentprune.ltr import QueryGroup, TrainingSet, save_model, train
from patentprune.ltr.training import TrainHyper
from patentprune.params import ValuationContext, build_feature_vector

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def main() -> None:
    eval_date = date(2026, 1, 15)
    cfg = load_engine_config(FIXTURES / "params.toml")
    portfolio = ingest_portfolio(FIXTURES / "sandisk_mini.jsonl", eval_date)
    kept, _ = verify_legal_status(portfolio)
    ctx = ValuationContext(
        eval_date=eval_date,
        gni_table=load_gni_table(FIXTURES / "gni.csv"),
        market=load_market_data(FIXTURES / "market.json"),
        cfg=cfg.params,
        cpc_prefix_depth=cfg.strata.cpc_prefix_depth,
    )
    vectors = {r.patent_id: build_feature_vector(r, ctx) for r in kept.records}

    groups: dict[str, list] = {}
    for row in read_jsonl(FIXTURES / "labels.jsonl"):
        groups.setdefault(row["query_id"], []).append(
            (vectors[row["patent_id"]], int(row["grade"]))
        )
    queries = tuple(
        QueryGroup(query_id=qid, items=tuple(items))
        for qid, items in sorted(groups.items())
        if len(items) >= 2
    )
    model = train(TrainingSet(queries=queries), TrainHyper(seed=7, ndcg_k=25))
    save_model(model, FIXTURES / "model.json")
    trace = model.training_meta["ndcg_trace"]
    print(f"trained on {len(queries)} query groups; "
          f"NDCG@25 {trace[0]:.4f} -> {trace[-1]:.4f}; wrote fixtures/model.json")


if __name__ == "__main__":
    main()
