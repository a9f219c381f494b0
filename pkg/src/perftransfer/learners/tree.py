"""CART regression trees.

Nodes are stored in flat arrays, node 0 being the root. Internal nodes send a row
left when ``x[feature] <= threshold``; leaves carry ``feature == -1`` and the
mean of the training targets routed to them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import FitError

DEFAULT_MAX_DEPTH = 12
DEFAULT_MIN_LEAF = 2
_GAIN_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class RegressionTreeModel:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray
    dim: int
    max_depth: int | None = DEFAULT_MAX_DEPTH
    min_leaf: int = DEFAULT_MIN_LEAF

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=int)
        for node in range(self.n_nodes):
            if self.feature[node] >= 0:
                depths[self.left[node]] = depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def predict_encoded(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ValueError(f"expected features of width {self.dim}, got shape {X.shape}")
        return kernels.tree_predict(self.feature, self.threshold, self.left, self.right, self.value, X)

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row."""
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(len(X), dtype=np.intp)
        for r, row in enumerate(X):
            node = 0
            while self.feature[node] >= 0:
                node = self.left[node] if row[self.feature[node]] <= self.threshold[node] else self.right[node]
            out[r] = node
        return out

    def to_dict(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "nodes": [
                [int(f), float(t), int(lft), int(rgt), float(v), int(n)]
                for f, t, lft, rgt, v, n in zip(
                    self.feature, self.threshold, self.left, self.right, self.value, self.n_samples
                )
            ],
        }

    @classmethod
    def from_dict(cls, d: dict, dim: int) -> "RegressionTreeModel":
        cols = list(zip(*d["nodes"]))
        ints = lambda c: np.array(c, dtype=np.intp)
        return cls(
            ints(cols[0]),
            np.array(cols[1], dtype=np.float64),
            ints(cols[2]),
            ints(cols[3]),
            np.array(cols[4], dtype=np.float64),
            ints(cols[5]),
            dim,
            d.get("max_depth"),
            int(d["min_leaf"]),
        )


def fit_tree(
    X,
    y,
    max_depth: int | None = DEFAULT_MAX_DEPTH,
    min_leaf: int = DEFAULT_MIN_LEAF,
    features_per_split: int | None = None,
    rng: np.random.Generator | None = None,
) -> RegressionTreeModel:
    """Grow a regression tree by greedy sum-of-squares reduction.

    Candidate thresholds are midpoints between adjacent distinct feature
    values. A node becomes a leaf at ``max_depth``, when it cannot give both
    children ``min_leaf`` rows, or when its targets are constant. With
    ``features_per_split < dim`` each split considers a random feature subset
    drawn from ``rng``; ties go to the lowest feature index, then the lowest
    threshold.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise FitError("tree features must be a 2-D array")
    n, dim = X.shape
    if n == 0:
        raise FitError("cannot fit a tree on an empty training set")
    if len(y) != n:
        raise FitError(f"{n} feature rows but {len(y)} targets")
    if min_leaf < 1:
        raise ValueError("min_leaf must be at least 1")
    k = dim if features_per_split is None else min(int(features_per_split), dim)
    if k < 1:
        raise ValueError("features_per_split must be at least 1")
    if k < dim and rng is None:
        raise ValueError("a random generator is required when features_per_split < dim")

    feature, threshold, left, right, value, n_samples = [], [], [], [], [], []
    all_features = np.arange(dim)

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(np.mean(y[idx])))
        n_samples.append(len(idx))
        return len(feature) - 1

    stack = [(new_node(np.arange(n)), np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        m = len(idx)
        yn = y[idx]
        if (max_depth is not None and depth >= max_depth) or m < 2 * min_leaf or yn.min() == yn.max():
            continue
        feats = all_features if k == dim else np.sort(rng.choice(dim, size=k, replace=False))
        sub = X[np.ix_(idx, feats)].T
        order = np.argsort(sub, axis=1, kind="stable")
        xs = np.ascontiguousarray(np.take_along_axis(sub, order, axis=1))
        ys = np.ascontiguousarray(yn[order])
        c, p, score = kernels.split_scan(xs, ys, min_leaf)
        if c < 0:
            continue
        total = np.cumsum(ys[c])[-1]
        parent = total * total / m
        if not score - parent > _GAIN_RTOL * abs(parent):
            continue
        f = int(feats[c])
        thr = 0.5 * (xs[c, p] + xs[c, p + 1])
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node] = f
        threshold[node] = float(thr)
        left[node] = new_node(li)
        right[node] = new_node(ri)
        # right pushed first so the left subtree is grown (and draws features) first
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return RegressionTreeModel(
        np.array(feature, dtype=np.intp),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.intp),
        np.array(right, dtype=np.intp),
        np.array(value, dtype=np.float64),
        np.array(n_samples, dtype=np.intp),
        dim,
        max_depth,
        min_leaf,
    )
