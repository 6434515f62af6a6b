"""From-scratch LambdaMART: list metrics, lambda gradients, boosted trees."""

from .metrics import dcg, ndcg, NegativeRelevance
from .lambdas import lambda_gradients
from .tree import RegressionTree, fit_tree
from .training import (
    CorruptModel,
    FeatureOrderMismatch,
    InsufficientQueries,
    QueryGroup,
    RankerModel,
    SchemaVersionMismatch,
    TrainingSet,
    load_model,
    predict,
    save_model,
    train,
)

__all__ = [
    "dcg", "ndcg", "NegativeRelevance", "lambda_gradients",
    "RegressionTree", "fit_tree", "QueryGroup", "TrainingSet",
    "RankerModel", "train", "predict", "save_model", "load_model",
    "InsufficientQueries", "FeatureOrderMismatch", "SchemaVersionMismatch",
    "CorruptModel",
]
