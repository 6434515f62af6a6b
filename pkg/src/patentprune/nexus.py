"""Need-seed matching and strategic report generation.

Relevance is TF-IDF cosine between a patent's seed-profile text and a need
node's text over shared corpus statistics.  The match score multiplies
normalized demand intensity into a weighted blend of relevance and source
authority; demand enters after min-max normalization across the graph so
the fit lands on a 0-100 scale regardless of raw dB values.  Matched
clusters (patents sharing a top need) become ontology reports: target,
scores, opportunity size, risks, recommended actions.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .claims import SeedProfile
from .config import MarketEntry, MatchConfig, ParamConfig, RiskThresholds
from .corpus import PatentRecord
from .needgraph import NeedNode
from .params import FeatureVector
from .textkit import CorpusStats, corpus_stats, cosine, tfidf_vector


class NexusError(ValueError):
    pass


class EmptyText(NexusError):
    pass


class EmptyGraph(NexusError):
    pass


class WeightsNotNormalized(NexusError):
    pass


class InputOutOfRange(NexusError):
    pass


INSUFFICIENT = "insufficient data"


@dataclass(frozen=True)
class MatchCandidate:
    patent_id: str
    need_id: str
    s_relevance: float
    s_authority: float
    s_demand_norm: float
    s_needseed: float
    fit_score: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "patent_id": self.patent_id,
            "need_id": self.need_id,
            "s_relevance": self.s_relevance,
            "s_authority": self.s_authority,
            "s_demand_norm": self.s_demand_norm,
            "s_needseed": self.s_needseed,
            "fit_score": self.fit_score,
        }

    @staticmethod
    def from_dict(d: Mapping[str, Any]) -> "MatchCandidate":
        return MatchCandidate(
            patent_id=d["patent_id"],
            need_id=d["need_id"],
            s_relevance=d["s_relevance"],
            s_authority=d["s_authority"],
            s_demand_norm=d["s_demand_norm"],
            s_needseed=d["s_needseed"],
            fit_score=d["fit_score"],
        )


def match_corpus_stats(
    seeds: Sequence[SeedProfile], graph: Sequence[NeedNode]
) -> CorpusStats:
    """Shared IDF statistics over all seed texts and need texts."""
    return corpus_stats(
        [s.match_text() for s in seeds] + [n.match_text() for n in graph]
    )


def relevance(seed: SeedProfile, need: NeedNode, stats: CorpusStats) -> float:
    """TF-IDF cosine in [0, 1] between seed-profile text and need text."""
    u = tfidf_vector(seed.match_text(), stats)
    v = tfidf_vector(need.match_text(), stats)
    if not u:
        raise EmptyText(f"seed profile {seed.patent_id} has no tokens")
    if not v:
        raise EmptyText(f"need {need.need_id} has no tokens")
    return cosine(u, v)


def need_seed_score(
    s_demand_norm: float,
    s_relevance: float,
    s_authority: float,
    relevance_weight: float = 0.7,
    authority_weight: float = 0.3,
) -> float:
    """Demand-gated blend of relevance and authority; monotone in each input."""
    if abs(relevance_weight + authority_weight - 1.0) > 1e-9:
        raise WeightsNotNormalized(
            f"weights sum to {relevance_weight + authority_weight}, expected 1"
        )
    for name, v in (
        ("s_demand_norm", s_demand_norm),
        ("s_relevance", s_relevance),
        ("s_authority", s_authority),
    ):
        if not 0.0 <= v <= 1.0:
            raise InputOutOfRange(f"{name} must be in [0, 1], got {v}")
    return s_demand_norm * (relevance_weight * s_relevance + authority_weight * s_authority)


def normalize_demand(graph: Sequence[NeedNode]) -> dict[str, float]:
    """Min-max scale demand_db across the graph; degenerate spans map to 1.0."""
    if not graph:
        return {}
    lo = min(n.demand_db for n in graph)
    hi = max(n.demand_db for n in graph)
    span = hi - lo
    if span == 0:
        return {n.need_id: 1.0 for n in graph}
    return {n.need_id: (n.demand_db - lo) / span for n in graph}


def match_portfolio(
    seeds: Sequence[SeedProfile],
    graph: Sequence[NeedNode],
    cfg: MatchConfig = MatchConfig(),
    stats: CorpusStats | None = None,
) -> list[MatchCandidate]:
    """Evaluate each seed against its best-overlapping needs.

    Candidates below the score threshold are dropped; survivors are ordered
    by fit descending, then patent id, then need id.
    """
    if not graph:
        raise EmptyGraph("need graph has no nodes")
    if stats is None:
        stats = match_corpus_stats(seeds, graph)
    demand_norm = normalize_demand(graph)
    from .needgraph import query_needs

    out: list[MatchCandidate] = []
    for seed in seeds:
        for node, _overlap in query_needs(graph, seed.key_terms, top_k=cfg.needs_per_seed):
            s_rel = relevance(seed, node, stats)
            score = need_seed_score(
                demand_norm[node.need_id],
                s_rel,
                node.authority,
                cfg.relevance_weight,
                cfg.authority_weight,
            )
            if score >= cfg.candidate_threshold:
                out.append(
                    MatchCandidate(
                        patent_id=seed.patent_id,
                        need_id=node.need_id,
                        s_relevance=s_rel,
                        s_authority=node.authority,
                        s_demand_norm=demand_norm[node.need_id],
                        s_needseed=score,
                        fit_score=int(round(100 * score)),
                    )
                )
    out.sort(key=lambda c: (-c.fit_score, -c.s_needseed, c.patent_id, c.need_id))
    return out


def cluster_matches(candidates: Sequence[MatchCandidate]) -> dict[str, list[MatchCandidate]]:
    """Group each patent's best candidate by need: one cluster per top need."""
    best: dict[str, MatchCandidate] = {}
    for cand in candidates:
        cur = best.get(cand.patent_id)
        if cur is None or (cand.s_needseed, cur.need_id) > (cur.s_needseed, cand.need_id):
            best[cand.patent_id] = cand
    clusters: dict[str, list[MatchCandidate]] = {}
    for cand in best.values():
        clusters.setdefault(cand.need_id, []).append(cand)
    for members in clusters.values():
        members.sort(key=lambda c: (-c.s_needseed, c.patent_id))
    return dict(sorted(clusters.items()))


@dataclass(frozen=True)
class ReportContext:
    records: Mapping[str, PatentRecord]
    vectors: Mapping[str, FeatureVector]
    seeds: Mapping[str, SeedProfile]
    needs: Mapping[str, NeedNode]
    ranking: Sequence[tuple[str, float]]
    market: Mapping[str, MarketEntry] = field(default_factory=dict)
    match_cfg: MatchConfig = field(default_factory=MatchConfig)
    params_cfg: ParamConfig = field(default_factory=ParamConfig)
    risk: RiskThresholds = field(default_factory=RiskThresholds)
    cpc_prefix_depth: int = 4


@dataclass(frozen=True)
class OntologyReport:
    cluster_id: str
    seed_asset: Mapping[str, Any]
    target_match: Mapping[str, Any]
    scoring: Mapping[str, Any]
    opportunity_size: Any
    risk_profile: tuple[str, ...]
    strategic_actions: tuple[str, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "cluster_id": self.cluster_id,
            "seed_asset": dict(self.seed_asset),
            "target_match": dict(self.target_match),
            "scoring": dict(self.scoring),
            "opportunity_size": self.opportunity_size,
            "risk_profile": list(self.risk_profile),
            "strategic_actions": list(self.strategic_actions),
        }


def _dominant_cpc_prefix(records: Sequence[PatentRecord], depth: int) -> str | None:
    counts = Counter(
        p for r in records if (p := r.primary_cpc_prefix(depth)) is not None
    )
    if not counts:
        return None
    # most common, ties toward the lexicographically first prefix
    return min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def _risk_lines(
    cluster: Sequence[PatentRecord],
    ctx: ReportContext,
) -> list[str]:
    lines: list[str] = []
    t = ctx.risk
    for record in cluster:
        pid = record.patent_id
        seed = ctx.seeds.get(pid)
        vec = ctx.vectors.get(pid)
        if seed is not None and seed.breadth_score < t.narrow_breadth_below:
            lines.append(f"{pid}: narrow claims (breadth {seed.breadth_score:.2f})")
        if seed is not None and seed.design_around_score > t.design_around_above:
            lines.append(
                f"{pid}: easy design-around (score {seed.design_around_score:.2f})"
            )
        if vec is not None and vec.get("L_rem") < t.short_life_below_years:
            lines.append(f"{pid}: short remaining life ({vec.get('L_rem'):.1f} years)")
        if (
            vec is not None
            and not vec.is_missing("N_comp")
            and vec.get("N_comp") > t.crowded_competitors_above
        ):
            lines.append(f"{pid}: crowded field ({int(vec.get('N_comp'))} competitors)")
        if record.fields_missing:
            lines.append(
                f"{pid}: missing data ({', '.join(sorted(record.fields_missing))})"
            )
    return lines or ["no salient risks flagged"]


def generate_report(
    cluster: Sequence[MatchCandidate],
    match: MatchCandidate,
    ctx: ReportContext,
) -> OntologyReport:
    """Fill every report field for one matched cluster; never leaves a gap.

    Market figures that cannot be resolved are marked "insufficient data"
    rather than failing the run.
    """
    if not cluster:
        raise NexusError("cannot report on an empty cluster")
    need = ctx.needs[match.need_id]
    records = [ctx.records[c.patent_id] for c in cluster]
    lead_seed = ctx.seeds[match.patent_id]

    rank_of = {pid: i + 1 for i, (pid, _) in enumerate(ctx.ranking)}
    score_of = dict(ctx.ranking)

    quote = max(
        need.supporting_triples,
        key=lambda t: (t.source_type == "RegulatoryFiling", t.source_type == "EarningsCall"),
    )

    prefix = _dominant_cpc_prefix(records, ctx.cpc_prefix_depth)
    entry = ctx.market.get(prefix) if prefix else None
    opportunity: Any = INSUFFICIENT
    if entry is not None and entry.tam_usd is not None:
        opportunity = {
            "tam_usd": entry.tam_usd,
            "revenue_usd": entry.revenue_usd if entry.revenue_usd is not None else INSUFFICIENT,
            "cpc_prefix": prefix,
        }

    actions: list[str] = []
    if match.fit_score >= 90 and match.s_authority >= 0.9:
        actions.append(
            f"Initiate targeted licensing discussion with {need.entity}, "
            f'leveraging {quote.source_type} {quote.source_doc}: "{quote.obj}"'
        )
    elif match.fit_score >= 70:
        actions.append(
            f"Open exploratory conversation with {need.entity} on the documented need"
        )
    else:
        actions.append(
            f"Monitor demand signals around {need.entity} and revisit at next review"
        )
    if len(cluster) > 1:
        others = [c.patent_id for c in cluster if c.patent_id != match.patent_id]
        actions.append(
            f"Package {match.patent_id} with related assets ({', '.join(others)}) "
            f"for a portfolio offering"
        )

    return OntologyReport(
        cluster_id=f"cluster-{match.need_id}",
        seed_asset={
            "patent_ids": [c.patent_id for c in cluster],
            "titles": {r.patent_id: r.title for r in records},
            "summary": lead_seed.solution_summary or INSUFFICIENT,
        },
        target_match={
            "entity": need.entity,
            "need_id": need.need_id,
            "need_description": need.description,
            "source_quote": {
                "doc": quote.source_doc,
                "source_type": quote.source_type,
                "date": quote.observed_date.isoformat(),
                "text": quote.obj,
            },
        },
        scoring={
            "ltr_rank": rank_of.get(match.patent_id, INSUFFICIENT),
            "s_pat": score_of.get(match.patent_id, INSUFFICIENT),
            "fit_score": match.fit_score,
            "s_relevance": match.s_relevance,
            "s_authority": match.s_authority,
            "s_demand_norm": match.s_demand_norm,
            "relevance_weight": ctx.match_cfg.relevance_weight,
            "authority_weight": ctx.match_cfg.authority_weight,
            # coefficients with no externally anchored values, echoed so a
            # reader can judge the scores' provenance
            "coefficients": {
                "ma_alpha": ctx.params_cfg.ma.alpha,
                "ma_beta": ctx.params_cfg.ma.beta,
                "inventor_alpha": ctx.params_cfg.inventor.alpha,
                "inventor_beta": ctx.params_cfg.inventor.beta,
                "inventor_gamma": ctx.params_cfg.inventor.gamma,
            },
        },
        opportunity_size=opportunity,
        risk_profile=tuple(_risk_lines(records, ctx)),
        strategic_actions=tuple(actions),
    )


def render_report_text(report: OntologyReport) -> str:
    """Human-readable rendering of a report, section by section."""
    lines = [
        f"=== Strategic Opportunity Report: {report.cluster_id} ===",
        "",
        "-- Target Profile --",
        f"Target entity:       {report.target_match['entity']}",
        f"Documented need:     {report.target_match['need_description']}",
        f"Source:              {report.target_match['source_quote']['source_type']} "
        f"{report.target_match['source_quote']['doc']} "
        f"({report.target_match['source_quote']['date']})",
        f"Quote:               \"{report.target_match['source_quote']['text']}\"",
        "",
        "-- Transaction Analysis --",
        f"Seed assets:         {', '.join(report.seed_asset['patent_ids'])}",
        f"Asset summary:       {report.seed_asset['summary']}",
        f"Fit score:           {report.scoring['fit_score']}/100",
        f"  relevance {report.scoring['s_relevance']:.3f} (weight {report.scoring['relevance_weight']}), "
        f"authority {report.scoring['s_authority']:.3f} (weight {report.scoring['authority_weight']}), "
        f"demand {report.scoring['s_demand_norm']:.3f}",
        f"Lead asset LTR rank: {report.scoring['ltr_rank']}",
        f"Unanchored coefficients: {report.scoring['coefficients']}",
        f"Opportunity size:    {report.opportunity_size}",
        "",
        "-- Risk Profile --",
        *[f"  * {line}" for line in report.risk_profile],
        "",
        "-- Strategic Actions --",
        *[f"  {i}. {a}" for i, a in enumerate(report.strategic_actions, start=1)],
        "",
    ]
    return "\n".join(lines)
