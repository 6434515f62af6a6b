"""Market-need knowledge graph built from unstructured text fixtures.

Surface patterns of the shape "<Entity> <trigger> <phrase>" extract
(subject, relation, need-phrase) triples from documents; triples cluster
into need nodes by entity plus phrase-token overlap; each node carries the
max authority of its sources and a windowed demand intensity in dB against
a configured corpus baseline.  Extraction is pattern-file driven so a
learned extractor can replace it without touching the graph or matching.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .config import NeedGraphConfig
from .corpus import EntityAliasTable, normalize_name
from .params import demand_snr
from .textkit import jaccard, tokenize

RELATIONS = ("Seeks", "Needs", "InvestingIn", "StrugglesWith", "ConstrainedBy")
SOURCE_TYPES = ("RegulatoryFiling", "EarningsCall", "MarketReport", "News", "Blog")

DEFAULT_PATTERNS = (
    ("is struggling with", "StrugglesWith"),
    ("struggles with", "StrugglesWith"),
    ("is investing in", "InvestingIn"),
    ("is constrained by", "ConstrainedBy"),
    ("lacks", "ConstrainedBy"),
    ("seeks", "Seeks"),
    ("needs", "Needs"),
)


class NeedGraphError(ValueError):
    pass


class UnknownSourceType(NeedGraphError):
    pass


@dataclass(frozen=True)
class Triple:
    subject: str
    relation: str
    obj: str
    source_doc: str
    source_type: str
    observed_date: date

    def to_dict(self) -> dict[str, Any]:
        return {
            "subject": self.subject,
            "relation": self.relation,
            "object": self.obj,
            "source_doc": self.source_doc,
            "source_type": self.source_type,
            "observed_date": self.observed_date.isoformat(),
        }


@dataclass(frozen=True)
class NeedNode:
    need_id: str
    entity: str
    description: str
    supporting_triples: tuple[Triple, ...]
    authority: float
    demand_db: float
    first_seen: date
    last_seen: date
    key_terms: tuple[str, ...]

    def match_text(self) -> str:
        return self.description + " " + " ".join(self.key_terms)

    def to_dict(self) -> dict[str, Any]:
        return {
            "need_id": self.need_id,
            "entity": self.entity,
            "description": self.description,
            "supporting_triples": [t.to_dict() for t in self.supporting_triples],
            "authority": self.authority,
            "demand_db": self.demand_db,
            "first_seen": self.first_seen.isoformat(),
            "last_seen": self.last_seen.isoformat(),
            "key_terms": list(self.key_terms),
        }


def authority_of(source_type: str, cfg: NeedGraphConfig | None = None) -> float:
    """Source credibility in [0, 1]: regulatory filings 1.0 down to blogs 0.4."""
    table = (cfg or NeedGraphConfig()).authority
    if source_type not in table:
        raise UnknownSourceType(f"unknown source type {source_type!r}")
    return table[source_type]


def load_patterns(path: str | Path | None) -> tuple[tuple[str, str], ...]:
    """Pattern file: `<ENT> <trigger words> <PHRASE> => Relation` per line."""
    if path is None:
        return DEFAULT_PATTERNS
    patterns = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            lhs, relation = line.rsplit("=>", 1)
        except ValueError as exc:
            raise NeedGraphError(f"bad pattern line {line!r}") from exc
        relation = relation.strip()
        if relation not in RELATIONS:
            raise NeedGraphError(f"unknown relation {relation!r} in pattern file")
        trigger = lhs.replace("<ENT>", "").replace("<PHRASE>", "").strip()
        if not trigger:
            raise NeedGraphError(f"pattern line {line!r} has no trigger words")
        patterns.append((trigger, relation))
    return tuple(patterns)


# An entity mention: capitalized word(s), possibly with joining lowercase
# particles ("of", "&"), immediately before the trigger.
_ENTITY_RE = r"(?P<entity>[A-Z][\w&.-]*(?:\s+(?:of|&|and)?\s*[A-Z0-9][\w&.-]*)*)"
_PHRASE_END_RE = re.compile(r"[.;!?\n]")


def _compile_pattern(trigger: str) -> re.Pattern[str]:
    return re.compile(_ENTITY_RE + r"\s+" + re.escape(trigger) + r"\s+")


def extract_triples(
    doc: Mapping[str, Any],
    patterns: Sequence[tuple[str, str]] = DEFAULT_PATTERNS,
    aliases: EntityAliasTable | None = None,
) -> list[Triple]:
    """Run all patterns over one document, left to right, non-overlapping.

    `doc` needs keys id (or doc_id, as in needs_corpus.jsonl), source_type,
    date, text.  Subjects are normalized through the alias table; phrases
    run to the end of the sentence.
    """
    doc_id = doc["id"] if "id" in doc else doc["doc_id"]
    text = doc["text"]
    if not text or not text.strip():
        return []
    source_type = doc["source_type"]
    if source_type not in SOURCE_TYPES:
        raise UnknownSourceType(f"unknown source type {source_type!r}")
    observed = doc["date"]
    if isinstance(observed, str):
        observed = date.fromisoformat(observed)
    aliases = aliases or EntityAliasTable()

    matches: list[tuple[int, int, str, str]] = []  # (start, end, entity, relation) per hit
    for trigger, relation in patterns:
        for m in _compile_pattern(trigger).finditer(text):
            matches.append((m.start(), m.end(), m.group("entity"), relation))
    matches.sort(key=lambda t: (t[0], -t[1]))

    triples: list[Triple] = []
    cursor = -1
    for start, end, entity, relation in matches:
        if start <= cursor:
            continue
        stop = _PHRASE_END_RE.search(text, end)
        phrase = text[end: stop.start() if stop else len(text)].strip().strip(",")
        if not phrase:
            continue
        cursor = stop.start() if stop else len(text)
        triples.append(
            Triple(
                subject=normalize_name(entity, aliases),
                relation=relation,
                obj=phrase,
                source_doc=str(doc_id),
                source_type=source_type,
                observed_date=observed,
            )
        )
    return triples


def extract_corpus(
    docs: Iterable[Mapping[str, Any]],
    patterns: Sequence[tuple[str, str]] = DEFAULT_PATTERNS,
    aliases: EntityAliasTable | None = None,
) -> list[Triple]:
    out: list[Triple] = []
    for doc in docs:
        out.extend(extract_triples(doc, patterns, aliases))
    return out


def build_graph(
    triples: Sequence[Triple],
    reference_date: date,
    cfg: NeedGraphConfig = NeedGraphConfig(),
) -> list[NeedNode]:
    """Cluster triples into need nodes and score demand intensity.

    A triple joins the first existing node (creation order) with the same
    entity whose seed-phrase tokens overlap its phrase tokens at Jaccard >=
    the merge threshold; otherwise it seeds a new node.  Demand is the SNR
    of in-window mention count against the configured baseline rate.
    """
    clusters: list[dict[str, Any]] = []
    for triple in triples:
        tokens = set(tokenize(triple.obj))
        home = None
        for cluster in clusters:
            if cluster["entity"] != triple.subject:
                continue
            if jaccard(tokens, cluster["seed_tokens"]) >= cfg.merge_jaccard:
                home = cluster
                break
        if home is None:
            clusters.append(
                {"entity": triple.subject, "seed_tokens": tokens, "triples": [triple]}
            )
        else:
            home["triples"].append(triple)

    window_start = reference_date - timedelta(days=cfg.window_days)
    nodes = []
    for i, cluster in enumerate(clusters, start=1):
        supports: list[Triple] = cluster["triples"]
        in_window = sum(
            1 for t in supports if window_start <= t.observed_date <= reference_date
        )
        terms = sorted({tok for t in supports for tok in tokenize(t.obj)})
        nodes.append(
            NeedNode(
                need_id=f"N{i:04d}",
                entity=cluster["entity"],
                description=supports[0].obj,
                supporting_triples=tuple(supports),
                authority=max(authority_of(t.source_type, cfg) for t in supports),
                demand_db=demand_snr(float(in_window), cfg.baseline_rate),
                first_seen=min(t.observed_date for t in supports),
                last_seen=max(t.observed_date for t in supports),
                key_terms=tuple(terms),
            )
        )
    return nodes


def query_needs(
    graph: Sequence[NeedNode], key_terms: Iterable[str], top_k: int | None = None
) -> list[tuple[NeedNode, float]]:
    """Nodes ranked by key-term Jaccard overlap, descending, ties by id."""
    terms = set(key_terms)
    scored = [(node, jaccard(terms, node.key_terms)) for node in graph]
    scored.sort(key=lambda ns: (-ns[1], ns[0].need_id))
    return scored[:top_k] if top_k is not None else scored
