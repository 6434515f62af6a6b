"""LambdaMART training loop, inference, and model serialization.

One query group is one strategic category: the model learns to order
patents within a category.  Feature rows are the 33 parameter values plus
their 33 missing-indicator bits.  Training is deterministic: a fixed seed
and input order produce identical model bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from ..params import MODEL_FEATURE_NAMES, FeatureVector
from ..strata import WeightingProfile, apply_profile
from .lambdas import lambda_gradients
from .metrics import ndcg
from .tree import RegressionTree, fit_tree

MODEL_SCHEMA_VERSION = 1
MAX_GRADE = 4


class LtrError(ValueError):
    pass


class InsufficientQueries(LtrError):
    pass


class FeatureOrderMismatch(LtrError):
    pass


class SchemaVersionMismatch(LtrError):
    pass


class CorruptModel(LtrError):
    pass


@dataclass(frozen=True)
class QueryGroup:
    query_id: str
    items: tuple[tuple[FeatureVector, int], ...]

    def __post_init__(self) -> None:
        if len(self.items) < 2:
            raise LtrError(f"query group {self.query_id!r} needs >= 2 items")
        for _, grade in self.items:
            if not 0 <= grade <= MAX_GRADE:
                raise LtrError(f"grade {grade} outside [0, {MAX_GRADE}]")


@dataclass(frozen=True)
class TrainingSet:
    queries: tuple[QueryGroup, ...]


@dataclass(frozen=True)
class TrainHyper:
    n_trees: int = 50
    learning_rate: float = 0.1
    max_leaves: int = 15
    min_samples_leaf: int = 5
    ndcg_k: int = 10
    sigma: float = 1.0
    ridge: float = 1e-2
    seed: int = 7


@dataclass(frozen=True)
class RankerModel:
    trees: tuple[RegressionTree, ...]
    learning_rate: float
    feature_names: tuple[str, ...]
    training_meta: Mapping[str, Any] = field(default_factory=dict)

    def score_rows(self, rows: np.ndarray) -> np.ndarray:
        scores = np.zeros(len(rows), dtype=np.float64)
        for tree in self.trees:
            scores += self.learning_rate * tree.predict_many(rows)
        return scores

    def used_feature_indices(self) -> set[int]:
        used: set[int] = set()
        for tree in self.trees:
            used |= tree.feature_indices()
        return used


def _group_rows(group: QueryGroup) -> np.ndarray:
    return np.array([vec.model_row() for vec, _ in group.items], dtype=np.float64)


def train(ts: TrainingSet, hyper: TrainHyper = TrainHyper()) -> RankerModel:
    """Boost regression trees on lambda gradients; record the NDCG trace.

    After each tree the mean training NDCG@k over all groups is appended to
    training_meta["ndcg_trace"]; entry 0 is the pre-training baseline (all
    scores zero, i.e. input order).
    """
    if not ts.queries:
        raise InsufficientQueries("training set has no query groups")

    X = np.vstack([_group_rows(g) for g in ts.queries])
    labels: list[list[int]] = [[grade for _, grade in g.items] for g in ts.queries]
    slices: list[slice] = []
    start = 0
    for g in ts.queries:
        slices.append(slice(start, start + len(g.items)))
        start += len(g.items)

    scores = np.zeros(len(X), dtype=np.float64)

    def mean_ndcg() -> float:
        total = 0.0
        for sl, labs in zip(slices, labels):
            s = scores[sl]
            order = sorted(range(len(labs)), key=lambda i: (-s[i], i))
            total += ndcg([labs[i] for i in order], hyper.ndcg_k)
        return total / len(slices)

    trace = [mean_ndcg()]
    trees: list[RegressionTree] = []
    for _ in range(hyper.n_trees):
        grad = np.zeros(len(X), dtype=np.float64)
        hess = np.zeros(len(X), dtype=np.float64)
        for sl, labs in zip(slices, labels):
            g_list, h_list = lambda_gradients(
                scores[sl].tolist(), labs, hyper.ndcg_k, hyper.sigma
            )
            grad[sl] = g_list
            hess[sl] = h_list
        tree = fit_tree(
            X,
            grad,
            hess,
            max_leaves=hyper.max_leaves,
            min_samples_leaf=hyper.min_samples_leaf,
            ridge=hyper.ridge,
            seed=hyper.seed,
        )
        trees.append(tree)
        scores += hyper.learning_rate * tree.predict_many(X)
        trace.append(mean_ndcg())

    return RankerModel(
        trees=tuple(trees),
        learning_rate=hyper.learning_rate,
        feature_names=MODEL_FEATURE_NAMES,
        training_meta={
            "seed": hyper.seed,
            "n_trees": hyper.n_trees,
            "max_leaves": hyper.max_leaves,
            "min_samples_leaf": hyper.min_samples_leaf,
            "ndcg_k": hyper.ndcg_k,
            "sigma": hyper.sigma,
            "ridge": hyper.ridge,
            "ndcg_trace": trace,
        },
    )


def predict(
    model: RankerModel,
    vectors: Sequence[FeatureVector],
    profile: WeightingProfile,
) -> list[tuple[str, float]]:
    """Rank patents by model score (descending, ties by ascending id)."""
    if tuple(model.feature_names) != MODEL_FEATURE_NAMES:
        raise FeatureOrderMismatch(
            "model feature order does not match this engine's feature layout"
        )
    if not vectors:
        return []
    rows = np.array(
        [apply_profile(v, profile).model_row() for v in vectors], dtype=np.float64
    )
    scores = model.score_rows(rows)
    ranked = sorted(
        zip((v.patent_id for v in vectors), scores.tolist()),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return ranked


def save_model(model: RankerModel, path: str | Path) -> None:
    payload = {
        "version": MODEL_SCHEMA_VERSION,
        "feature_names": list(model.feature_names),
        "learning_rate": model.learning_rate,
        "training_meta": dict(model.training_meta),
        "trees": [t.to_dict() for t in model.trees],
    }
    from ..jsonio import write_json

    write_json(path, payload)


def load_model(path: str | Path) -> RankerModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptModel(f"cannot read model at {path}: {exc}") from exc
    if not isinstance(payload, dict) or "version" not in payload:
        raise CorruptModel(f"model at {path} lacks a schema version")
    if payload["version"] != MODEL_SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"model schema {payload['version']} != {MODEL_SCHEMA_VERSION}"
        )
    try:
        return RankerModel(
            trees=tuple(RegressionTree.from_dict(t) for t in payload["trees"]),
            learning_rate=payload["learning_rate"],
            feature_names=tuple(payload["feature_names"]),
            training_meta=payload.get("training_meta", {}),
        )
    except (KeyError, TypeError) as exc:
        raise CorruptModel(f"model at {path} is malformed: {exc}") from exc
