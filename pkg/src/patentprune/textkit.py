"""Tokenization and TF-IDF machinery shared by claims, needgraph, and nexus.

Tokens are maximal lowercase [a-z0-9]+ runs.  IDF is smoothed,
idf(t) = ln((1 + N) / (1 + df(t))) + 1, so it is strictly positive and two
identical texts always reach cosine 1.0 even when every term is shared by
the whole corpus.  Weights are raw term count times IDF.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class CorpusStats:
    """Document frequencies over a fixed corpus of texts."""

    n_docs: int
    doc_freq: Mapping[str, int]

    def idf(self, token: str) -> float:
        return math.log((1 + self.n_docs) / (1 + self.doc_freq.get(token, 0))) + 1.0


def corpus_stats(texts: Iterable[str]) -> CorpusStats:
    df: Counter[str] = Counter()
    n = 0
    for text in texts:
        n += 1
        df.update(set(tokenize(text)))
    return CorpusStats(n_docs=n, doc_freq=dict(df))


def tfidf_vector(text: str, stats: CorpusStats) -> dict[str, float]:
    counts = Counter(tokenize(text))
    return {tok: cnt * stats.idf(tok) for tok, cnt in counts.items()}


def cosine(u: Mapping[str, float], v: Mapping[str, float]) -> float:
    if not u or not v:
        return 0.0
    if len(v) < len(u):
        u, v = v, u
    dot = sum(w * v[tok] for tok, w in u.items() if tok in v)
    nu = math.sqrt(sum(w * w for w in u.values()))
    nv = math.sqrt(sum(w * w for w in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    # nonnegative weights keep the true value in [0, 1]; clamp rounding spill
    return min(1.0, dot / (nu * nv))


def top_terms(text: str, stats: CorpusStats, k: int = 20) -> list[str]:
    """Top-k tokens by TF-IDF weight, ties broken alphabetically."""
    weights = tfidf_vector(text, stats)
    ranked = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))
    return [tok for tok, _ in ranked[:k]]


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)
