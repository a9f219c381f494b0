"""Regression learners used as performance models."""
from .forest import RandomForestModel, default_features_per_split, fit_forest
from .linear import (
    Influence,
    LinearTermModel,
    OLSResult,
    coefficient_pvalues,
    fit_ols,
    influential_terms,
    prune_small_coefficients,
    stepwise_fit,
    stepwise_regression,
)
from .nn import NeuralNetModel, fit_nn
from .tree import RegressionTreeModel, fit_tree

LEARNERS = ("rt", "nn")


def fit_learner(kind: str, X, y, seed: int = 0, **params):
    """Fit a performance model of the given learner kind on encoded features."""
    if kind == "rt":
        return fit_tree(X, y, **params)
    if kind == "nn":
        return fit_nn(X, y, seed=seed, **params)
    if kind == "rf":
        return fit_forest(X, y, seed=seed, **params)
    raise ValueError(f"unknown learner {kind!r}; expected one of rt, nn, rf")


__all__ = [
    "Influence",
    "LEARNERS",
    "LinearTermModel",
    "NeuralNetModel",
    "OLSResult",
    "RandomForestModel",
    "RegressionTreeModel",
    "coefficient_pvalues",
    "default_features_per_split",
    "fit_forest",
    "fit_learner",
    "fit_nn",
    "fit_ols",
    "fit_tree",
    "influential_terms",
    "prune_small_coefficients",
    "stepwise_fit",
    "stepwise_regression",
]
