"""Deterministic claim parsing and Seed Profile construction.

A parsed claim is split into preamble, transitional phrase, and limitation
list by a surface grammar; claim kind comes from a head-noun lexicon and
dependency from explicit "claim N" references.  Breadth and design-around
scores are bounded heuristics over that structure.  The analyzer surface is
small on purpose: a smarter (embedding-based) implementation can replace
`build_seed_profile` without touching the matching stage.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import PatentRecord
from .textkit import CorpusStats, corpus_stats, top_terms


class ClaimsError(ValueError):
    pass


class EmptyClaim(ClaimsError):
    pass


class NoIndependentClaims(ClaimsError):
    pass


# Matched earliest-in-text; at equal positions the longer phrase wins.
_TRANSITIONALS = (
    ("consisting essentially of", "ConsistingEssentiallyOf"),
    ("consists essentially of", "ConsistingEssentiallyOf"),
    ("consisting of", "ConsistingOf"),
    ("consists of", "ConsistingOf"),
    ("comprised of", "Comprising"),
    ("comprising", "Comprising"),
    ("comprises", "Comprising"),
)

_KIND_LEXICON = (
    ("method", "Process"),
    ("process", "Process"),
    ("procedure", "Process"),
    ("composition", "Composition"),
    ("compound", "Composition"),
    ("formulation", "Composition"),
    ("mixture", "Composition"),
    ("apparatus", "Product"),
    ("system", "Product"),
    ("device", "Product"),
    ("medium", "Product"),
    ("machine", "Product"),
    ("assembly", "Product"),
    ("circuit", "Product"),
    ("article", "Product"),
    ("product", "Product"),
    ("controller", "Product"),
    ("package", "Product"),
)

_DEPENDENT_RE = re.compile(r"\bclaims?\s+\d+", re.IGNORECASE)
_NUMERIC_RE = re.compile(r"\d")

_MATERIAL_TERMS = (
    "steel", "aluminum", "copper", "silicon", "tungsten", "titanium",
    "polymer", "polyethylene", "ceramic", "graphene", "silica", "nitride",
    "oxide", "epoxy", "cobalt", "lithium",
)

# Starter broad-term set; production runs load a lexicon file instead.
DEFAULT_BROAD_TERMS = ("means", "member", "element", "mechanism")

_PROBLEM_CUES = (
    "a need exists",
    "there is a need",
    "need for",
    "problem of",
    "disadvantage",
    "drawback",
    "challenge of",
    "difficulty",
)

_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class ParsedClaim:
    claim_number: int
    preamble: str
    transitional: str  # Comprising | ConsistingOf | ConsistingEssentiallyOf | Unknown
    limitations: tuple[str, ...]
    is_independent: bool
    claim_kind: str  # Product | Process | Composition | Unknown


@dataclass(frozen=True)
class SeedProfile:
    patent_id: str
    solution_summary: str
    problem_statement: str
    breadth_score: float
    design_around_score: float
    key_terms: tuple[str, ...]
    mapping_confidence: str = "heuristic"

    def match_text(self) -> str:
        """Text used for semantic matching against need descriptions."""
        return " ".join(
            (self.solution_summary, self.problem_statement, " ".join(self.key_terms))
        )

    def to_dict(self) -> dict:
        return {
            "patent_id": self.patent_id,
            "solution_summary": self.solution_summary,
            "problem_statement": self.problem_statement,
            "breadth_score": self.breadth_score,
            "design_around_score": self.design_around_score,
            "key_terms": list(self.key_terms),
            "mapping_confidence": self.mapping_confidence,
        }


def _find_transitional(lowered: str) -> tuple[int, str, str] | None:
    best: tuple[int, str, str] | None = None
    for phrase, label in _TRANSITIONALS:
        pos = lowered.find(phrase)
        if pos < 0:
            continue
        if best is None or pos < best[0]:
            best = (pos, phrase, label)
    return best


def _split_limitations(body: str) -> tuple[str, ...]:
    parts = re.split(r";|\n", body)
    out = []
    for part in parts:
        cleaned = part.strip().strip(".,:").strip()
        cleaned = re.sub(r"^(?:and|wherein)\s+", "", cleaned, flags=re.IGNORECASE)
        if cleaned:
            out.append(cleaned)
    return tuple(out)


def _detect_kind(preamble: str) -> str:
    lowered = preamble.lower()
    hits = []
    for word, kind in _KIND_LEXICON:
        m = re.search(rf"\b{word}\b", lowered)
        if m:
            hits.append((m.start(), kind))
    if not hits:
        return "Unknown"
    return min(hits)[1]


def parse_claim(text: str, number: int) -> ParsedClaim:
    """Parse one claim; total for non-empty text (worst case Unknown fields)."""
    if not text or not text.strip():
        raise EmptyClaim(f"claim {number} is empty")
    stripped = text.strip()
    lowered = stripped.lower()

    found = _find_transitional(lowered)
    if found is None:
        comma = stripped.find(",")
        preamble = stripped[:comma].strip() if comma > 0 else stripped
        transitional = "Unknown"
        limitations = (stripped.rstrip("."),)
    else:
        pos, phrase, transitional = found
        preamble = stripped[:pos].strip().rstrip(",")
        body = stripped[pos + len(phrase):].lstrip(" :").rstrip()
        limitations = _split_limitations(body)
        if not limitations:
            limitations = (body.strip().rstrip(".") or preamble,)

    return ParsedClaim(
        claim_number=number,
        preamble=preamble,
        transitional=transitional,
        limitations=limitations,
        is_independent=_DEPENDENT_RE.search(stripped) is None,
        claim_kind=_detect_kind(preamble),
    )


def _count_broad_hits(claim: ParsedClaim, lexicon: Sequence[str]) -> int:
    text = " ".join((claim.preamble,) + claim.limitations).lower()
    hits = 0
    for term in lexicon:
        hits += len(re.findall(rf"\b{re.escape(term.lower())}\b", text))
    return hits


def breadth_score(claim: ParsedClaim, lexicon: Sequence[str] = DEFAULT_BROAD_TERMS) -> float:
    """Logistic blend of broad-term hits, limitation count, and openness.

    raw = +1 per broad-term occurrence, -0.25 per limitation beyond the
    first, +0.5 for an open "comprising" transition; squashed to (0, 1).
    """
    raw = (
        1.0 * _count_broad_hits(claim, lexicon)
        - 0.25 * max(0, len(claim.limitations) - 1)
        + (0.5 if claim.transitional == "Comprising" else 0.0)
    )
    return 1.0 / (1.0 + math.exp(-raw))


def _is_indispensable_double(limitation: str) -> bool:
    lowered = limitation.lower()
    if _NUMERIC_RE.search(lowered):
        return True
    return any(re.search(rf"\b{m}\b", lowered) for m in _MATERIAL_TERMS)


def design_around_score(claim: ParsedClaim) -> float:
    """How easily a competitor avoids this claim, in [0, 1); higher = riskier.

    Each limitation adds weight 1 (2 when it pins a numeric range or a
    specific material); the score is 1 - 1/weight, so a single broad
    limitation scores 0 and every added limitation raises the score.
    """
    weight = sum(2 if _is_indispensable_double(l) else 1 for l in claim.limitations)
    if weight < 1:
        return 0.0
    return 1.0 - 1.0 / weight


def parse_record_claims(record: PatentRecord) -> list[ParsedClaim]:
    return [parse_claim(c.text, c.number) for c in record.claims if c.text.strip()]


def seed_source_text(record: PatentRecord) -> str:
    return " ".join(c.text for c in record.claims) + " " + record.abstract


def portfolio_corpus_stats(records: Iterable[PatentRecord]) -> CorpusStats:
    return corpus_stats(seed_source_text(r) for r in records)


def _problem_statement(abstract: str) -> str:
    if not abstract.strip():
        return ""
    sentences = _SENTENCE_RE.split(abstract.strip())
    lowered = [s.lower() for s in sentences]
    for cue in _PROBLEM_CUES:
        for sent, low in zip(sentences, lowered):
            if cue in low:
                return sent.strip()
    return sentences[0].strip()


def build_seed_profile(
    record: PatentRecord,
    stats: CorpusStats,
    lexicon: Sequence[str] = DEFAULT_BROAD_TERMS,
) -> SeedProfile:
    """Aggregate parsed claims into one per-patent capability profile.

    Breadth is governed by the broadest independent claim, design-around
    risk by the hardest-to-avoid one (a competitor must clear every
    independent claim).  Key terms are the top-20 TF-IDF tokens of
    claims + abstract against the portfolio corpus.
    """
    parsed = parse_record_claims(record)
    independents = [c for c in parsed if c.is_independent]
    if not independents:
        raise NoIndependentClaims(f"{record.patent_id} has no independent claims")

    scored = [(breadth_score(c, lexicon), c) for c in independents]
    best_breadth, lead = max(scored, key=lambda sc: (sc[0], -sc[1].claim_number))
    design = min(design_around_score(c) for c in independents)

    summary = f"{lead.preamble}, characterized by: " + "; ".join(lead.limitations[:3])
    terms = tuple(top_terms(seed_source_text(record), stats, k=20))

    return SeedProfile(
        patent_id=record.patent_id,
        solution_summary=summary,
        problem_statement=_problem_statement(record.abstract),
        breadth_score=best_breadth,
        design_around_score=design,
        key_terms=terms,
    )


def load_broad_terms(path: str | Path | None) -> tuple[str, ...]:
    """Lexicon file: one term per line, '#' comments allowed."""
    if path is None:
        return DEFAULT_BROAD_TERMS
    terms = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        term = line.split("#", 1)[0].strip().lower()
        if term:
            terms.append(term)
    return tuple(terms)
