"""Random forests of CART regression trees."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import FitError
from .tree import DEFAULT_MAX_DEPTH, DEFAULT_MIN_LEAF, RegressionTreeModel, fit_tree

DEFAULT_N_TREES = 50


def default_features_per_split(dim: int) -> int:
    return max(1, math.ceil(dim / 3))


@dataclass(frozen=True, eq=False)
class RandomForestModel:
    trees: tuple
    dim: int
    n_trees: int
    features_per_split: int
    bootstrap: bool
    seed: int

    def predict_encoded(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        preds = np.stack([t.predict_encoded(X) for t in self.trees])
        return preds.mean(axis=0)

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "features_per_split": self.features_per_split,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict, dim: int) -> "RandomForestModel":
        return cls(
            tuple(RegressionTreeModel.from_dict(t, dim) for t in d["trees"]),
            dim,
            int(d["n_trees"]),
            int(d["features_per_split"]),
            bool(d["bootstrap"]),
            int(d["seed"]),
        )


def fit_forest(
    X,
    y,
    n_trees: int = DEFAULT_N_TREES,
    features_per_split: int | None = None,
    seed: int = 0,
    bootstrap: bool = True,
    max_depth: int | None = DEFAULT_MAX_DEPTH,
    min_leaf: int = DEFAULT_MIN_LEAF,
) -> RandomForestModel:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise FitError("cannot fit a forest on an empty training set")
    if n_trees < 1:
        raise ValueError("n_trees must be at least 1")
    n, dim = X.shape
    k = default_features_per_split(dim) if features_per_split is None else int(features_per_split)
    trees = []
    for child in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(child)
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(fit_tree(X[rows], y[rows], max_depth, min_leaf, k, rng))
    return RandomForestModel(tuple(trees), dim, n_trees, k, bootstrap, seed)
