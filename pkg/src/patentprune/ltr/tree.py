"""Deterministic regression tree with exact greedy splits and Newton leaves.

Growth is best-first up to max_leaves.  Split quality is the variance
reduction of the gradient targets; candidate thresholds are midpoints
between consecutive distinct feature values (no histogram binning --
portfolios are desk-scale and exactness buys reproducibility).  Ties are
broken toward the lowest feature index, then the lowest threshold, then
node creation order, so the tree is a pure function of its inputs.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class RegressionTree:
    """Flat node-array tree: internal nodes carry (feature, threshold, left,
    right); leaves carry a value.  Rows go left when x[feature] <= threshold.
    """

    nodes: tuple[Mapping[str, Any], ...]

    def predict_one(self, row: Sequence[float]) -> float:
        node = self.nodes[0]
        while "value" not in node:
            branch = "left" if row[node["feature"]] <= node["threshold"] else "right"
            node = self.nodes[node[branch]]
        return node["value"]

    def predict_many(self, rows: np.ndarray) -> np.ndarray:
        out = np.empty(len(rows), dtype=np.float64)
        stack = [(0, np.arange(len(rows)))]
        while stack:
            node_id, idx = stack.pop()
            node = self.nodes[node_id]
            if "value" in node:
                out[idx] = node["value"]
                continue
            mask = rows[idx, node["feature"]] <= node["threshold"]
            stack.append((node["left"], idx[mask]))
            stack.append((node["right"], idx[~mask]))
        return out

    def feature_indices(self) -> set[int]:
        return {n["feature"] for n in self.nodes if "feature" in n}

    def to_dict(self) -> dict[str, Any]:
        return {"nodes": [dict(n) for n in self.nodes]}

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> "RegressionTree":
        return RegressionTree(nodes=tuple(dict(n) for n in data["nodes"]))


def _best_split(
    X: np.ndarray, g: np.ndarray, idx: np.ndarray, min_samples_leaf: int
) -> tuple[float, int, float] | None:
    """Best (gain, feature, threshold) for the sample set, or None."""
    n = len(idx)
    if n < 2 * min_samples_leaf:
        return None
    g_node = g[idx]
    total = g_node.sum()
    parent_term = total * total / n
    best: tuple[float, int, float] | None = None
    for f in range(X.shape[1]):
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        if sv[0] == sv[-1]:
            continue
        csum = np.cumsum(g_node[order])[:-1]
        left_n = np.arange(1, n)
        valid = (sv[:-1] != sv[1:]) & (left_n >= min_samples_leaf) & (n - left_n >= min_samples_leaf)
        if not valid.any():
            continue
        gains = np.where(
            valid,
            csum * csum / left_n + (total - csum) ** 2 / (n - left_n) - parent_term,
            -np.inf,
        )
        i = int(np.argmax(gains))  # first max: lowest threshold on ties
        gain = float(gains[i])
        if gain <= 1e-12:
            continue
        threshold = float((sv[i] + sv[i + 1]) / 2.0)
        if best is None or gain > best[0]:
            best = (gain, f, threshold)
    return best


def fit_tree(
    features: np.ndarray,
    gradients: np.ndarray,
    hessians: np.ndarray,
    max_leaves: int = 15,
    min_samples_leaf: int = 5,
    ridge: float = 1e-2,
    seed: int = 0,
) -> RegressionTree:
    """Grow one tree on (gradient, hessian) targets.

    Leaf value is the Newton step -sum(grad) / (sum(hess) + ridge).  Data
    where no valid split exists (e.g. all features constant) yields a
    single-leaf stump, not an error.  `seed` is recorded by the caller for
    provenance; growth itself has no random component.
    """
    X = np.asarray(features, dtype=np.float64)
    g = np.asarray(gradients, dtype=np.float64)
    h = np.asarray(hessians, dtype=np.float64)
    n = len(X)
    if n == 0:
        raise ValueError("cannot fit a tree on zero samples")

    def leaf_value(idx: np.ndarray) -> float:
        return float(-g[idx].sum() / (h[idx].sum() + ridge))

    # each pending leaf: (negative gain, creation order, idx, split)
    pending: list[tuple[float, int, Any, Any]] = []
    counter = 0

    def push(idx: np.ndarray) -> dict[str, Any]:
        nonlocal counter
        leaf = {"idx": idx, "split": _best_split(X, g, idx, min_samples_leaf)}
        if leaf["split"] is not None:
            heapq.heappush(pending, (-leaf["split"][0], counter, leaf))
        counter += 1
        return leaf

    root = push(np.arange(n))
    tree_nodes: list[dict[str, Any]] = []
    leaves = 1

    node_of = {id(root): 0}
    tree_nodes.append({"leaf": root})

    while pending and leaves < max_leaves:
        _, _, leaf = heapq.heappop(pending)
        gain, f, threshold = leaf["split"]
        idx = leaf["idx"]
        mask = X[idx, f] <= threshold
        left = push(idx[mask])
        right = push(idx[~mask])
        slot = node_of.pop(id(leaf))
        tree_nodes[slot] = {"feature": int(f), "threshold": threshold}
        node_of[id(left)] = len(tree_nodes)
        tree_nodes[slot]["left"] = len(tree_nodes)
        tree_nodes.append({"leaf": left})
        node_of[id(right)] = len(tree_nodes)
        tree_nodes[slot]["right"] = len(tree_nodes)
        tree_nodes.append({"leaf": right})
        leaves += 1

    final_nodes = []
    for node in tree_nodes:
        if "leaf" in node:
            final_nodes.append({"value": leaf_value(node["leaf"]["idx"])})
        else:
            final_nodes.append(node)
    return RegressionTree(nodes=tuple(final_nodes))
