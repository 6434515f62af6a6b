"""Portfolio ingestion, legal-status filtering, and entity normalization.

The input is a JSONL file of patent records (one object per line, schema
below).  Ingestion validates every line, collects all rejects with line
numbers, and only returns a clean, duplicate-free Portfolio.  Legal
filtering keeps Granted/Pending records.  Entity normalization resolves
assignee spellings to one canonical name via a deterministic chain:
uppercase -> punctuation to spaces -> strip trailing legal suffixes ->
alias-table lookup.

Required JSONL keys: patent_id, title, claims[], filing_date, grant_date
(null allowed while Pending), expiry_date, legal_status, assignee_raw,
cpc_codes[].  All event lists and direct_metrics are optional; absent ones
default to empty and are remembered in `fields_missing` so downstream risk
reporting can flag thin records.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Any, Mapping, Sequence

from .config import file_digest

LEGAL_STATUSES = frozenset(
    {"Granted", "Pending", "Expired", "Abandoned", "Lapsed", "Invalidated"}
)
IN_FORCE_STATUSES = frozenset({"Granted", "Pending"})
JURISDICTION_STATUSES = frozenset({"granted", "pending"})
LITIGATION_OUTCOMES = frozenset({"PlaintiffWin", "Settlement", "DefendantWin"})

# Trailing corporate-form tokens removed before alias lookup.  Extend via
# the `suffixes` argument (external file), not by editing this constant.
DEFAULT_LEGAL_SUFFIXES = frozenset({"CORP", "INC", "LTD", "LLC", "CO", "GMBH"})

OPTIONAL_LIST_FIELDS = (
    "family_members",
    "jurisdictions",
    "forward_citations",
    "backward_citations",
    "examiner_citations",
    "reassignments",
    "litigation_events",
    "inventors",
)
REQUIRED_FIELDS = (
    "patent_id",
    "title",
    "claims",
    "filing_date",
    "grant_date",
    "expiry_date",
    "legal_status",
    "assignee_raw",
    "cpc_codes",
)


class CorpusError(ValueError):
    pass


class MalformedRecord(CorpusError):
    """One or more JSONL lines failed validation; carries (line, reason) pairs."""

    def __init__(self, rejects: Sequence[tuple[int, str]]):
        self.rejects = list(rejects)
        lines = "; ".join(f"line {ln}: {why}" for ln, why in self.rejects)
        super().__init__(f"rejected {len(self.rejects)} record(s): {lines}")


class DuplicateId(CorpusError):
    def __init__(self, duplicates: Sequence[tuple[str, int, int]]):
        self.duplicates = list(duplicates)
        msg = "; ".join(
            f"{pid} on lines {a} and {b}" for pid, a, b in self.duplicates
        )
        super().__init__(f"duplicate patent_id: {msg}")


class EmptyPortfolio(CorpusError):
    pass


@dataclass(frozen=True)
class ClaimText:
    number: int
    text: str


@dataclass(frozen=True)
class RejectionCounts:
    n102: int = 0
    n103: int = 0
    n112: int = 0


@dataclass(frozen=True)
class PatentRecord:
    patent_id: str
    title: str
    abstract: str
    claims: tuple[ClaimText, ...]
    filing_date: date
    grant_date: date | None
    expiry_date: date
    legal_status: str
    assignee_raw: str
    assignee_canonical: str = ""
    inventors: tuple[str, ...] = ()
    cpc_codes: tuple[str, ...] = ()
    family_members: tuple[str, ...] = ()
    jurisdictions: tuple[tuple[str, str], ...] = ()
    forward_citations: tuple[tuple[str, date], ...] = ()
    backward_citations: tuple[str, ...] = ()
    examiner_citations: tuple[str, ...] = ()
    reassignments: tuple[tuple[date, str, str], ...] = ()
    litigation_events: tuple[tuple[str, float], ...] = ()
    rejection_events: RejectionCounts = field(default_factory=RejectionCounts)
    cip_flag: bool = False
    direct_metrics: Mapping[str, float] = field(default_factory=dict)
    fields_missing: frozenset[str] = frozenset()

    def primary_cpc_prefix(self, depth: int = 4) -> str | None:
        if not self.cpc_codes:
            return None
        return self.cpc_codes[0].replace(" ", "")[:depth]

    def to_dict(self) -> dict[str, Any]:
        return {
            "patent_id": self.patent_id,
            "title": self.title,
            "abstract": self.abstract,
            "claims": [{"number": c.number, "text": c.text} for c in self.claims],
            "filing_date": self.filing_date.isoformat(),
            "grant_date": self.grant_date.isoformat() if self.grant_date else None,
            "expiry_date": self.expiry_date.isoformat(),
            "legal_status": self.legal_status,
            "assignee_raw": self.assignee_raw,
            "assignee_canonical": self.assignee_canonical,
            "inventors": list(self.inventors),
            "cpc_codes": list(self.cpc_codes),
            "family_members": list(self.family_members),
            "jurisdictions": [list(j) for j in self.jurisdictions],
            "forward_citations": [
                [cid, d.isoformat()] for cid, d in self.forward_citations
            ],
            "backward_citations": list(self.backward_citations),
            "examiner_citations": list(self.examiner_citations),
            "reassignments": [
                [d.isoformat(), a, b] for d, a, b in self.reassignments
            ],
            "litigation_events": [list(e) for e in self.litigation_events],
            "rejection_events": {
                "n102": self.rejection_events.n102,
                "n103": self.rejection_events.n103,
                "n112": self.rejection_events.n112,
            },
            "cip_flag": self.cip_flag,
            "direct_metrics": dict(self.direct_metrics),
            "fields_missing": sorted(self.fields_missing),
        }


@dataclass(frozen=True)
class EntityAliasTable:
    """Pattern -> canonical map; both sides pre-normalized at load."""

    entries: Mapping[str, str] = field(default_factory=dict)
    suffixes: frozenset[str] = DEFAULT_LEGAL_SUFFIXES

    def canonical_for(self, normalized: str) -> str:
        return self.entries.get(normalized, normalized)


@dataclass(frozen=True)
class Portfolio:
    records: tuple[PatentRecord, ...]
    evaluation_date: date
    provenance: str

    def __post_init__(self) -> None:
        ids = [r.patent_id for r in self.records]
        if len(ids) != len(set(ids)):
            raise CorpusError("portfolio contains duplicate patent ids")

    def by_id(self) -> dict[str, PatentRecord]:
        return {r.patent_id: r for r in self.records}

    def to_dict(self) -> dict[str, Any]:
        return {
            "evaluation_date": self.evaluation_date.isoformat(),
            "provenance": self.provenance,
            "records": [r.to_dict() for r in self.records],
        }

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> "Portfolio":
        records = tuple(_record_from_dict(r) for r in data["records"])
        return Portfolio(
            records=records,
            evaluation_date=date.fromisoformat(data["evaluation_date"]),
            provenance=data["provenance"],
        )


def _parse_date(value: Any, label: str) -> date:
    if not isinstance(value, str):
        raise ValueError(f"{label} must be an ISO-8601 date string")
    try:
        return date.fromisoformat(value)
    except ValueError as exc:
        raise ValueError(f"{label}: {exc}") from exc


def _record_from_dict(raw: Mapping[str, Any]) -> PatentRecord:
    missing = {f for f in REQUIRED_FIELDS if f not in raw}
    if missing:
        raise ValueError(f"missing required field(s): {sorted(missing)}")

    patent_id = raw["patent_id"]
    if not isinstance(patent_id, str) or not patent_id:
        raise ValueError("patent_id must be a non-empty string")

    legal_status = raw["legal_status"]
    if legal_status not in LEGAL_STATUSES:
        raise ValueError(f"unknown legal_status {legal_status!r}")

    filing = _parse_date(raw["filing_date"], "filing_date")
    expiry = _parse_date(raw["expiry_date"], "expiry_date")
    grant: date | None = None
    if raw["grant_date"] is not None:
        grant = _parse_date(raw["grant_date"], "grant_date")
    elif legal_status != "Pending":
        raise ValueError("grant_date may be null only while legal_status is Pending")
    if grant is not None and not filing <= grant <= expiry:
        raise ValueError("dates must satisfy filing <= grant <= expiry")
    if grant is None and expiry < filing:
        raise ValueError("expiry_date precedes filing_date")

    claims_raw = raw["claims"]
    if not isinstance(claims_raw, list) or not claims_raw:
        raise ValueError("claims must be a non-empty list")
    claims = []
    for c in claims_raw:
        if not isinstance(c, dict) or "number" not in c or "text" not in c:
            raise ValueError("each claim needs number and text")
        claims.append(ClaimText(number=int(c["number"]), text=str(c["text"])))

    jurisdictions = []
    for j in raw.get("jurisdictions") or []:
        country, status = j
        if status not in JURISDICTION_STATUSES:
            raise ValueError(f"jurisdiction status {status!r} not in {{granted, pending}}")
        jurisdictions.append((str(country).upper(), status))

    litigation = []
    for e in raw.get("litigation_events") or []:
        outcome, value = e
        if outcome not in LITIGATION_OUTCOMES:
            raise ValueError(f"unknown litigation outcome {outcome!r}")
        value = float(value)
        if value < 0:
            raise ValueError("litigation case_value must be >= 0")
        litigation.append((outcome, value))

    rej_raw = raw.get("rejection_events") or {}
    rejections = RejectionCounts(
        n102=int(rej_raw.get("n102", 0)),
        n103=int(rej_raw.get("n103", 0)),
        n112=int(rej_raw.get("n112", 0)),
    )
    if min(rejections.n102, rejections.n103, rejections.n112) < 0:
        raise ValueError("rejection counts must be >= 0")

    forward = []
    for fc in raw.get("forward_citations") or []:
        cid, when = fc
        forward.append((str(cid), _parse_date(when, "forward_citation date")))

    reassignments = []
    for r in raw.get("reassignments") or []:
        when, src, dst = r
        reassignments.append((_parse_date(when, "reassignment date"), str(src), str(dst)))

    inventors = tuple(
        str(i["name"]) if isinstance(i, dict) else str(i)
        for i in raw.get("inventors") or []
    )

    tracked_optional = OPTIONAL_LIST_FIELDS + (
        "direct_metrics",
        "abstract",
        "rejection_events",
        "cip_flag",
    )
    fields_missing = frozenset(f for f in tracked_optional if f not in raw)

    return PatentRecord(
        patent_id=patent_id,
        title=str(raw["title"]),
        abstract=str(raw.get("abstract", "")),
        claims=tuple(claims),
        filing_date=filing,
        grant_date=grant,
        expiry_date=expiry,
        legal_status=legal_status,
        assignee_raw=str(raw["assignee_raw"]),
        assignee_canonical=str(raw.get("assignee_canonical", "")),
        inventors=inventors,
        cpc_codes=tuple(str(c) for c in raw["cpc_codes"]),
        family_members=tuple(str(m) for m in raw.get("family_members") or []),
        jurisdictions=tuple(jurisdictions),
        forward_citations=tuple(forward),
        backward_citations=tuple(str(b) for b in raw.get("backward_citations") or []),
        examiner_citations=tuple(str(e) for e in raw.get("examiner_citations") or []),
        reassignments=tuple(reassignments),
        litigation_events=tuple(litigation),
        rejection_events=rejections,
        cip_flag=bool(raw.get("cip_flag", False)),
        direct_metrics={str(k): float(v) for k, v in (raw.get("direct_metrics") or {}).items()},
        fields_missing=fields_missing,
    )


def ingest_portfolio(path: str | Path, evaluation_date: date) -> Portfolio:
    """Load and validate a patents.jsonl file into a Portfolio.

    All invalid lines are collected and raised together as MalformedRecord
    (line number + reason each); duplicate patent ids raise DuplicateId
    naming both offending lines; an input with no records raises
    EmptyPortfolio.
    """
    path = Path(path)
    records: list[PatentRecord] = []
    rejects: list[tuple[int, str]] = []
    seen: dict[str, int] = {}
    duplicates: list[tuple[str, int, int]] = []

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                rejects.append((lineno, f"bad JSON ({exc.msg})"))
                continue
            try:
                record = _record_from_dict(raw)
            except ValueError as exc:
                rejects.append((lineno, str(exc)))
                continue
            if record.patent_id in seen:
                duplicates.append((record.patent_id, seen[record.patent_id], lineno))
                continue
            seen[record.patent_id] = lineno
            records.append(record)

    if rejects:
        raise MalformedRecord(rejects)
    if duplicates:
        raise DuplicateId(duplicates)
    if not records:
        raise EmptyPortfolio(f"no records in {path}")

    return Portfolio(
        records=tuple(records),
        evaluation_date=evaluation_date,
        provenance=file_digest(path),
    )


def verify_legal_status(
    portfolio: Portfolio,
) -> tuple[Portfolio, list[tuple[str, str]]]:
    """Partition into in-force records (Granted/Pending) and dropped ones.

    kept + dropped is exactly the input; the dropped list carries each
    record's legal status as the reason.
    """
    kept = tuple(r for r in portfolio.records if r.legal_status in IN_FORCE_STATUSES)
    dropped = [
        (r.patent_id, r.legal_status)
        for r in portfolio.records
        if r.legal_status not in IN_FORCE_STATUSES
    ]
    return (
        Portfolio(
            records=kept,
            evaluation_date=portfolio.evaluation_date,
            provenance=portfolio.provenance,
        ),
        dropped,
    )


_PUNCT_RE = re.compile(r"[^A-Z0-9 ]+")
_SPACE_RE = re.compile(r"\s+")


def base_normalize(name: str, suffixes: frozenset[str] = DEFAULT_LEGAL_SUFFIXES) -> str:
    """Uppercase, punctuation to spaces, collapse, strip trailing legal suffixes."""
    s = _SPACE_RE.sub(" ", _PUNCT_RE.sub(" ", name.upper())).strip()
    tokens = s.split(" ") if s else []
    while len(tokens) > 1 and tokens[-1] in suffixes:
        tokens.pop()
    return " ".join(tokens)


def normalize_name(name: str, aliases: EntityAliasTable) -> str:
    return aliases.canonical_for(base_normalize(name, aliases.suffixes))


def load_alias_table(
    path: str | Path | None,
    suffixes: frozenset[str] = DEFAULT_LEGAL_SUFFIXES,
) -> EntityAliasTable:
    """Load aliases.csv (header `pattern,canonical`).

    Patterns and canonicals are both base-normalized, and canonical chains
    (canonical that is itself another pattern) are resolved at load so that
    runtime lookup is a single hop and normalization stays idempotent.
    """
    if path is None:
        return EntityAliasTable(entries={}, suffixes=suffixes)
    entries: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"pattern", "canonical"}:
            raise CorpusError(f"{path} must have header pattern,canonical")
        for row in reader:
            pattern = base_normalize(row["pattern"], suffixes)
            canonical = base_normalize(row["canonical"], suffixes)
            if not canonical:
                raise CorpusError(f"empty canonical for pattern {row['pattern']!r}")
            if pattern in entries and entries[pattern] != canonical:
                raise CorpusError(f"conflicting alias for pattern {row['pattern']!r}")
            entries[pattern] = canonical

    resolved: dict[str, str] = {}
    for pattern, canonical in entries.items():
        seen = {pattern}
        while canonical in entries and canonical not in seen and entries[canonical] != canonical:
            seen.add(canonical)
            canonical = entries[canonical]
        resolved[pattern] = canonical
    return EntityAliasTable(entries=resolved, suffixes=suffixes)


def normalize_entities(portfolio: Portfolio, aliases: EntityAliasTable) -> Portfolio:
    """Fill assignee_canonical for every record; idempotent."""
    records = tuple(
        replace(r, assignee_canonical=normalize_name(r.assignee_raw, aliases))
        for r in portfolio.records
    )
    return Portfolio(
        records=records,
        evaluation_date=portfolio.evaluation_date,
        provenance=portfolio.provenance,
    )
