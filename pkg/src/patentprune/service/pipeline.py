"""Run orchestration over a plain-directory store.

A run is a directory of canonical-JSON artifacts under `<runs>/<run_id>/`:
inspectable, diffable, and byte-reproducible given identical inputs,
configs, and seeds.  Phases advance in a fixed order and halt at the three
review gates; every step is resumable because each one reads only persisted
artifacts.  All writes are atomic, and nothing in an artifact depends on
wall-clock time.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Any, Mapping, Sequence

from .. import claims as claims_mod
from .. import needgraph, nexus
from ..config import (
    EngineConfig,
    MarketEntry,
    file_digest,
    load_engine_config,
    load_gni_table,
    load_market_data,
)
from ..corpus import (
    EntityAliasTable,
    Portfolio,
    ingest_portfolio,
    load_alias_table,
    normalize_entities,
    verify_legal_status,
)
from ..gates import Decision, GateStore, downstream_payload, export_feedback_labels
from ..jsonio import atomic_write_text, read_json, read_jsonl, write_json, write_jsonl
from ..ltr import (
    QueryGroup,
    RankerModel,
    TrainingSet,
    load_model,
    predict,
    save_model,
    train,
)
from ..ltr.training import TrainHyper
from ..params import FeatureVector, ValuationContext, build_feature_vector
from ..strata import Category, WeightingProfile, categorize, load_profiles, resolve_profile

PHASES = (
    "Ingested",
    "Categorized",
    "Ranked",
    "GatePostRanking",
    "Matched",
    "GatePostMatch",
    "Reported",
    "GateFinal",
    "Complete",
    "Failed",
)

_GATE_AFTER_PHASE = {
    "GatePostRanking": "PostRanking",
    "GatePostMatch": "PostMatch",
    "GateFinal": "FinalOntology",
}


class PipelineError(RuntimeError):
    pass


class UnknownRun(PipelineError):
    pass


@dataclass(frozen=True)
class RunInputs:
    """Paths and run parameters frozen at creation."""

    patents: str
    evaluation_date: date
    run_id: str
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

    def paths(self) -> dict[str, str | None]:
        return {
            "patents": self.patents,
            "aliases": self.aliases,
            "gni": self.gni,
            "market": self.market,
            "needs_corpus": self.needs_corpus,
            "patterns": self.patterns,
            "broad_terms": self.broad_terms,
            "params_config": self.params_config,
            "profiles_config": self.profiles_config,
            "model": self.model,
        }


def _derive_run_id(patents: str, evaluation_date: date, profile: str, seed: int) -> str:
    h = hashlib.sha256(
        f"{file_digest(patents)}|{evaluation_date.isoformat()}|{profile}|{seed}".encode()
    )
    return "run-" + h.hexdigest()[:12]


class Service:
    """Stateless pipeline driver over a runs directory."""

    def __init__(self, runs_dir: str | Path):
        self.runs_dir = Path(runs_dir)

    # -- run store ---------------------------------------------------------

    def run_dir(self, run_id: str) -> Path:
        return self.runs_dir / run_id

    def list_runs(self) -> list[dict[str, Any]]:
        if not self.runs_dir.is_dir():
            return []
        out = []
        for p in sorted(self.runs_dir.iterdir()):
            if (p / "run.json").is_file():
                run = read_json(p / "run.json")
                out.append({"run_id": run["run_id"], "phase": run["phase"], "profile": run["profile"]})
        return out

    def load_run(self, run_id: str) -> dict[str, Any]:
        path = self.run_dir(run_id) / "run.json"
        if not path.is_file():
            raise UnknownRun(f"no run {run_id!r} under {self.runs_dir}")
        return read_json(path)

    def _save_run(self, run: Mapping[str, Any]) -> None:
        write_json(self.run_dir(run["run_id"]) / "run.json", run)

    def _gate_store(self, run: Mapping[str, Any]) -> GateStore:
        cfg = self._engine_cfg(run)
        return GateStore(self.run_dir(run["run_id"]), max_payload=cfg.gates.ranking_top_n_max)

    # -- input loading -----------------------------------------------------

    def _engine_cfg(self, run: Mapping[str, Any]) -> EngineConfig:
        return load_engine_config(run["inputs"]["params_config"])

    def _profiles(self, run: Mapping[str, Any]) -> dict[str, WeightingProfile]:
        return load_profiles(run["inputs"]["profiles_config"])

    def _aliases(self, run: Mapping[str, Any]) -> EntityAliasTable:
        return load_alias_table(run["inputs"]["aliases"])

    def _market(self, run: Mapping[str, Any]) -> dict[str, MarketEntry]:
        path = run["inputs"]["market"]
        return load_market_data(path) if path else {}

    def _gni(self, run: Mapping[str, Any]) -> dict[str, float]:
        path = run["inputs"]["gni"]
        return load_gni_table(path) if path else {"USA": 1.0}

    def _portfolio(self, run: Mapping[str, Any]) -> Portfolio:
        data = read_json(self.run_dir(run["run_id"]) / "portfolio.json")
        return Portfolio.from_dict(data["portfolio"])

    def _vectors(self, run: Mapping[str, Any]) -> dict[str, FeatureVector]:
        rows = read_jsonl(self.run_dir(run["run_id"]) / "vectors.jsonl")
        vectors = [FeatureVector.from_dict(r) for r in rows]
        return {v.patent_id: v for v in vectors}

    def _categories(self, run: Mapping[str, Any]) -> list[Category]:
        data = read_json(self.run_dir(run["run_id"]) / "categories.json")
        return [Category.from_dict(c) for c in data]

    def _resolve_profile(self, run: Mapping[str, Any], name: str | None = None) -> WeightingProfile:
        return resolve_profile(name or run["profile"], self._profiles(run))

    # -- phase 1: ingest -----------------------------------------------------

    def create_run(self, inputs: RunInputs) -> dict[str, Any]:
        """Ingest, filter, and normalize; the run starts at phase Ingested."""
        run_id = inputs.run_id or _derive_run_id(
            inputs.patents, inputs.evaluation_date, inputs.profile, inputs.seed
        )
        run_dir = self.run_dir(run_id)
        if (run_dir / "run.json").is_file():
            raise PipelineError(f"run {run_id!r} already exists")

        portfolio = ingest_portfolio(inputs.patents, inputs.evaluation_date)
        kept, dropped = verify_legal_status(portfolio)
        kept = normalize_entities(kept, load_alias_table(inputs.aliases))

        digests = {
            name: file_digest(path)
            for name, path in inputs.paths().items()
            if path is not None
        }
        run = {
            "run_id": run_id,
            "phase": "Ingested",
            "evaluation_date": inputs.evaluation_date.isoformat(),
            "profile": inputs.profile,
            "seed": inputs.seed,
            "selection": None,
            "inputs": inputs.paths(),
            "digests": digests,
            "artifacts": {"portfolio": "portfolio.json"},
            "failure": None,
        }
        write_json(
            run_dir / "portfolio.json",
            {
                "portfolio": kept.to_dict(),
                "dropped": [[pid, reason] for pid, reason in dropped],
                "ingested_count": len(portfolio.records),
            },
        )
        self._save_run(run)
        return run

    # -- phase 2: vectors + categories ---------------------------------------

    def categorize_run(self, run_id: str) -> dict[str, Any]:
        run = self.load_run(run_id)
        self._require_phase(run, "Ingested")
        cfg = self._engine_cfg(run)
        portfolio = self._portfolio(run)
        ctx = ValuationContext(
            eval_date=date.fromisoformat(run["evaluation_date"]),
            gni_table=self._gni(run),
            market=self._market(run),
            cfg=cfg.params,
            cpc_prefix_depth=cfg.strata.cpc_prefix_depth,
        )
        vectors = [build_feature_vector(r, ctx) for r in portfolio.records]
        write_jsonl(self.run_dir(run_id) / "vectors.jsonl", (v.to_dict() for v in vectors))

        categories = categorize(
            portfolio, {v.patent_id: v for v in vectors}, cfg.strata.cpc_prefix_depth
        )
        write_json(self.run_dir(run_id) / "categories.json", [c.to_dict() for c in categories])

        run["artifacts"]["vectors"] = "vectors.jsonl"
        run["artifacts"]["categories"] = "categories.json"
        run["phase"] = "Categorized"
        self._save_run(run)
        return run

    def category_table(self, run_id: str, profile: str | None = None) -> list[dict[str, Any]]:
        """Dashboard rows: categories with their score under a profile (what-if safe)."""
        run = self.load_run(run_id)
        prof = self._resolve_profile(run, profile)
        from ..strata import category_score

        rows = []
        for c in self._categories(run):
            row = c.to_dict()
            row["score"] = category_score(c, prof)
            row["size"] = len(c.members)
            rows.append(row)
        rows.sort(key=lambda r: (-r["score"], r["key"]))
        return rows

    # -- phase 3: rank + PostRanking gate -------------------------------------

    def rank_run(
        self,
        run_id: str,
        select_categories: Sequence[str] | None = None,
        profile: str | None = None,
    ) -> dict[str, Any]:
        run = self.load_run(run_id)
        self._require_phase(run, "Categorized")
        cfg = self._engine_cfg(run)
        if profile:
            run["profile"] = profile
        prof = self._resolve_profile(run)
        categories = self._categories(run)
        known = {c.key for c in categories}
        if select_categories:
            unknown = set(select_categories) - known
            if unknown:
                raise PipelineError(f"unknown categories: {sorted(unknown)}")
            selected = [c for c in categories if c.key in set(select_categories)]
            run["selection"] = sorted(select_categories)
        else:
            selected = categories
            run["selection"] = None

        model = self._load_model(run)
        vectors = self._vectors(run)
        member_ids = [pid for c in selected for pid in c.members]
        ranked = predict(model, [vectors[pid] for pid in member_ids], prof)
        write_json(
            self.run_dir(run_id) / "ranking.json",
            {
                "profile": prof.name,
                "selection": run["selection"],
                "ranking": [[pid, score] for pid, score in ranked],
            },
        )
        run["artifacts"]["ranking"] = "ranking.json"
        run["phase"] = "Ranked"
        self._save_run(run)

        query_of = {pid: c.key for c in categories for pid in c.members}
        top_n = min(cfg.gates.ranking_top_n, len(ranked))
        payload = [
            {
                "item_id": pid,
                "query_id": query_of[pid],
                "score": score,
                "rank": i + 1,
                "grade": None,
            }
            for i, (pid, score) in enumerate(ranked[:top_n])
        ]
        self._gate_store(run).open_gate("PostRanking", payload, payload_ref="ranking.json")
        run["phase"] = "GatePostRanking"
        self._save_run(run)
        return run

    def _load_model(self, run: Mapping[str, Any]) -> RankerModel:
        path = run["inputs"]["model"]
        if not path:
            raise PipelineError("run has no model input; train one with `pp train`")
        return load_model(path)

    def ranking_preview(self, run_id: str, profile: str) -> list[list[Any]]:
        """What-if re-ranking under a transient profile; mutates nothing."""
        run = self.load_run(run_id)
        prof = self._resolve_profile(run, profile)
        model = self._load_model(run)
        data = read_json(self.run_dir(run_id) / "ranking.json")
        ids = [pid for pid, _ in data["ranking"]]
        vectors = self._vectors(run)
        ranked = predict(model, [vectors[pid] for pid in ids], prof)
        return [[pid, score] for pid, score in ranked]

    # -- phase 4: seeds, needs, matches + PostMatch gate -----------------------

    @staticmethod
    def _ensure_gate_open(store: GateStore, gate_id: str, payload, ref: str) -> None:
        latest = store.latest(gate_id)
        if latest is not None and not latest.resolved:
            return  # crash-resume: the gate is already awaiting review
        store.open_gate(gate_id, payload, payload_ref=ref)

    def match_run(self, run_id: str) -> dict[str, Any]:
        """Seed profiles + need graph + matching for the ranking survivors.

        Requires the PostRanking gate to be resolved; idempotent, so an
        interrupted advance can simply be re-run.
        """
        run = self.load_run(run_id)
        self._require_phase(run, "GatePostRanking", "Matched", "GatePostMatch")
        cfg = self._engine_cfg(run)
        store = self._gate_store(run)
        gate = store.latest("PostRanking")
        if gate is None or gate.state not in ("Approved", "Amended"):
            raise PipelineError("PostRanking gate must be approved/amended before matching")
        nxt = store.latest("PostMatch")
        if nxt is not None and nxt.resolved:
            raise PipelineError("PostMatch already reviewed; continue with report")
        surviving = [item["item_id"] for item in downstream_payload(gate)]

        portfolio = self._portfolio(run)
        by_id = portfolio.by_id()
        stats = claims_mod.portfolio_corpus_stats(portfolio.records)
        lexicon = claims_mod.load_broad_terms(run["inputs"]["broad_terms"])
        seeds = [
            claims_mod.build_seed_profile(by_id[pid], stats, lexicon) for pid in surviving
        ]
        write_jsonl(self.run_dir(run_id) / "seeds.jsonl", (s.to_dict() for s in seeds))

        needs_path = run["inputs"]["needs_corpus"]
        if not needs_path:
            raise PipelineError("run has no needs corpus; matching requires one")
        docs = list(read_jsonl(needs_path))
        patterns = needgraph.load_patterns(run["inputs"]["patterns"])
        aliases = self._aliases(run)
        triples = needgraph.extract_corpus(docs, patterns, aliases)
        graph = needgraph.build_graph(
            triples, date.fromisoformat(run["evaluation_date"]), cfg.need_graph
        )
        write_json(self.run_dir(run_id) / "needs.json", [n.to_dict() for n in graph])

        candidates = nexus.match_portfolio(seeds, graph, cfg.match)
        write_jsonl(self.run_dir(run_id) / "matches.jsonl", (c.to_dict() for c in candidates))

        vectors = self._vectors(run)
        best: dict[str, float] = {}
        for cand in candidates:
            best[cand.patent_id] = max(best.get(cand.patent_id, 0.0), cand.s_needseed)
        write_jsonl(
            self.run_dir(run_id) / "vectors_matched.jsonl",
            (
                (vectors[pid].with_need_seed(best[pid]) if pid in best else vectors[pid]).to_dict()
                for pid in surviving
            ),
        )

        run["artifacts"]["seeds"] = "seeds.jsonl"
        run["artifacts"]["needs"] = "needs.json"
        run["artifacts"]["matches"] = "matches.jsonl"
        run["artifacts"]["vectors_matched"] = "vectors_matched.jsonl"
        run["phase"] = "Matched"
        self._save_run(run)

        if not candidates:
            raise PipelineError("no match candidates above threshold; nothing to review")
        payload = [
            {
                "item_id": f"{c.patent_id}::{c.need_id}",
                "patent_id": c.patent_id,
                "need_id": c.need_id,
                "fit_score": c.fit_score,
                "s_needseed": c.s_needseed,
            }
            for c in candidates
        ]
        self._ensure_gate_open(store, "PostMatch", payload, "matches.jsonl")
        run["phase"] = "GatePostMatch"
        self._save_run(run)
        return run

    # -- phase 5: reports + Final gate ----------------------------------------

    def report_run(self, run_id: str) -> dict[str, Any]:
        """Ontology reports for the clusters surviving the match gate."""
        run = self.load_run(run_id)
        self._require_phase(run, "GatePostMatch", "Reported", "GateFinal")
        cfg = self._engine_cfg(run)
        store = self._gate_store(run)
        gate = store.latest("PostMatch")
        if gate is None or gate.state not in ("Approved", "Amended"):
            raise PipelineError("PostMatch gate must be approved/amended before reporting")
        nxt = store.latest("FinalOntology")
        if nxt is not None and nxt.resolved:
            raise PipelineError("FinalOntology already reviewed; the run can be finalized")
        surviving_items = downstream_payload(gate)

        all_candidates = {
            f"{c['patent_id']}::{c['need_id']}": nexus.MatchCandidate.from_dict(c)
            for c in read_jsonl(self.run_dir(run_id) / "matches.jsonl")
        }
        survivors = [all_candidates[item["item_id"]] for item in surviving_items]
        clusters = nexus.cluster_matches(survivors)

        portfolio = self._portfolio(run)
        seeds = {
            s["patent_id"]: claims_mod.SeedProfile(**s)
            for s in read_jsonl(self.run_dir(run_id) / "seeds.jsonl")
        }
        needs = {
            n["need_id"]: _need_from_dict(n)
            for n in read_json(self.run_dir(run_id) / "needs.json")
        }
        ranking = [
            (pid, score)
            for pid, score in read_json(self.run_dir(run_id) / "ranking.json")["ranking"]
        ]
        ctx = nexus.ReportContext(
            records=portfolio.by_id(),
            vectors=self._vectors(run),
            seeds=seeds,
            needs=needs,
            ranking=ranking,
            market=self._market(run),
            match_cfg=cfg.match,
            params_cfg=cfg.params,
            risk=cfg.risk,
            cpc_prefix_depth=cfg.strata.cpc_prefix_depth,
        )
        reports = []
        for members in clusters.values():
            report = nexus.generate_report(members, members[0], ctx)
            reports.append(report)
            write_json(
                self.run_dir(run_id) / "reports" / f"{report.cluster_id}.json",
                report.to_dict(),
            )
            atomic_write_text(
                self.run_dir(run_id) / "reports" / f"{report.cluster_id}.txt",
                nexus.render_report_text(report),
            )
        run["artifacts"]["reports"] = "reports"
        run["phase"] = "Reported"
        self._save_run(run)

        if not reports:
            raise PipelineError("no clusters survived the match gate")
        payload = [
            {
                "item_id": r.cluster_id,
                "patent_ids": list(r.seed_asset["patent_ids"]),
                "fit_score": r.scoring["fit_score"],
                "entity": r.target_match["entity"],
            }
            for r in reports
        ]
        self._ensure_gate_open(store, "FinalOntology", payload, "reports")
        run["phase"] = "GateFinal"
        self._save_run(run)
        return run

    def finalize_run(self, run_id: str) -> dict[str, Any]:
        run = self.load_run(run_id)
        self._require_phase(run, "GateFinal")
        store = self._gate_store(run)
        gate = store.latest("FinalOntology")
        if gate is None or gate.state not in ("Approved", "Amended"):
            raise PipelineError("FinalOntology gate must be approved/amended to finish")
        surviving = downstream_payload(gate)
        pruned = sorted({pid for item in surviving for pid in item["patent_ids"]})
        write_json(
            self.run_dir(run_id) / "pruned.json",
            {
                "patent_ids": pruned,
                "clusters": [item["item_id"] for item in surviving],
                "profile": run["profile"],
            },
        )
        run["artifacts"]["pruned"] = "pruned.json"
        run["phase"] = "Complete"
        self._save_run(run)
        return run

    # -- gate resolution -------------------------------------------------------

    def review_gate(
        self,
        run_id: str,
        gate_id: str,
        action: str,
        verdicts: Sequence[Decision] = (),
        reviewer: str = "",
    ) -> dict[str, Any]:
        """Resolve a gate and advance the pipeline to the next gate or the end."""
        run = self.load_run(run_id)
        expected_gate = _GATE_AFTER_PHASE.get(run["phase"])
        if expected_gate != gate_id:
            raise PipelineError(
                f"run is at phase {run['phase']}; gate {gate_id} is not awaiting review"
            )
        store = self._gate_store(run)
        resolved = store.submit_review(gate_id, action, verdicts, reviewer)
        if resolved.state == "Rejected":
            run["phase"] = "Failed"
            run["failure"] = f"gate {gate_id} rejected by {reviewer or 'reviewer'}"
            self._save_run(run)
            return run
        if gate_id == "PostRanking":
            return self.match_run(run_id)
        if gate_id == "PostMatch":
            return self.report_run(run_id)
        return self.finalize_run(run_id)

    # -- feedback + training -----------------------------------------------------

    def export_labels(self, run_id: str) -> Path:
        run = self.load_run(run_id)
        rows = export_feedback_labels(self._gate_store(run))
        out = self.run_dir(run_id) / "labels_feedback.jsonl"
        write_jsonl(out, rows)
        run["artifacts"]["labels_feedback"] = "labels_feedback.jsonl"
        self._save_run(run)
        return out

    def train_model(
        self,
        run_id: str,
        label_paths: Sequence[str | Path],
        out_path: str | Path,
        hyper: TrainHyper | None = None,
    ) -> Path:
        """Train on labels resolved against this run's vectors and categories.

        Multiple label files merge in order.  A later file's grade for a
        patent overrides the earlier grade in every group the patent appears
        in -- a reviewer's regrade supersedes the original expert judgment
        wholesale, not just within one query group.
        """
        run = self.load_run(run_id)
        vectors = self._vectors(run)
        merged: dict[tuple[str, str], int] = {}
        overrides: dict[str, int] = {}
        for i, path in enumerate(label_paths):
            for row in read_jsonl(path):
                merged[(row["query_id"], row["patent_id"])] = int(row["grade"])
                if i > 0:
                    overrides[row["patent_id"]] = int(row["grade"])
        groups: dict[str, list[tuple[FeatureVector, int]]] = {}
        for (query_id, patent_id), grade in sorted(merged.items()):
            if patent_id not in vectors:
                raise PipelineError(f"label references unknown patent {patent_id}")
            grade = overrides.get(patent_id, grade)
            groups.setdefault(query_id, []).append((vectors[patent_id], grade))
        queries = tuple(
            QueryGroup(query_id=qid, items=tuple(items))
            for qid, items in sorted(groups.items())
            if len(items) >= 2
        )
        model = train(TrainingSet(queries=queries), hyper or TrainHyper())
        save_model(model, out_path)
        return Path(out_path)

    # -- end-to-end -----------------------------------------------------------

    def run_pipeline(
        self,
        inputs: RunInputs,
        select_categories: Sequence[str] | None = None,
        auto_approve: bool = False,
        reviewer: str = "auto",
    ) -> dict[str, Any]:
        """Drive a new run forward until the next gate, or to completion when
        auto_approve resolves every gate (test/replay mode)."""
        run = self.create_run(inputs)
        run_id = run["run_id"]
        self.categorize_run(run_id)
        run = self.rank_run(run_id, select_categories=select_categories)
        if not auto_approve:
            return run
        for gate_id in ("PostRanking", "PostMatch", "FinalOntology"):
            run = self.review_gate(run_id, gate_id, "Approved", reviewer=reviewer)
        return run

    # -- misc -----------------------------------------------------------------

    @staticmethod
    def _require_phase(run: Mapping[str, Any], *phases: str) -> None:
        if run["phase"] not in phases:
            raise PipelineError(
                f"run {run['run_id']} is at phase {run['phase']}, expected {phases}"
            )


def _need_from_dict(d: Mapping[str, Any]) -> needgraph.NeedNode:
    return needgraph.NeedNode(
        need_id=d["need_id"],
        entity=d["entity"],
        description=d["description"],
        supporting_triples=tuple(
            needgraph.Triple(
                subject=t["subject"],
                relation=t["relation"],
                obj=t["object"],
                source_doc=t["source_doc"],
                source_type=t["source_type"],
                observed_date=date.fromisoformat(t["observed_date"]),
            )
            for t in d["supporting_triples"]
        ),
        authority=d["authority"],
        demand_db=d["demand_db"],
        first_seen=date.fromisoformat(d["first_seen"]),
        last_seen=date.fromisoformat(d["last_seen"]),
        key_terms=tuple(d["key_terms"]),
    )
