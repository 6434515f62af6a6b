"""Graded-relevance list quality: DCG and NDCG with exponential gain.

Gain 2^rel - 1, discount log2(position + 1).  A list whose ideal DCG is
zero (every grade zero) has NDCG defined as 1.0: there is nothing to get
wrong, and such groups must not contribute training signal.
"""

from __future__ import annotations

import math
from typing import Sequence


class NegativeRelevance(ValueError):
    pass


def dcg(relevances: Sequence[float], k: int | None = None) -> float:
    """Discounted cumulative gain of relevances already in ranked order."""
    n = len(relevances) if k is None else min(k, len(relevances))
    total = 0.0
    for i in range(n):
        rel = relevances[i]
        if rel < 0:
            raise NegativeRelevance(f"relevance {rel} at position {i + 1}")
        total += (2.0 ** rel - 1.0) / math.log2(i + 2)
    return total


def ndcg(relevances_in_ranked_order: Sequence[float], k: int | None = None) -> float:
    """DCG normalized by the best achievable ordering; in [0, 1]."""
    ideal = dcg(sorted(relevances_in_ranked_order, reverse=True), k)
    if ideal == 0.0:
        return 1.0
    return dcg(relevances_in_ranked_order, k) / ideal
