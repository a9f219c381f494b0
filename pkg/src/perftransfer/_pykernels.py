"""Pure numpy versions of the compiled tree kernels (same arithmetic order)."""
import numpy as np


def split_scan(xs, ys, min_leaf):
    k, m = xs.shape
    if m < 2:
        return -1, -1, -np.inf
    cs = np.cumsum(ys, axis=1)
    total = cs[:, -1:]
    s = cs[:, :-1]
    nl = np.arange(1, m, dtype=np.float64)
    nr = m - nl
    sr = total - s
    with np.errstate(divide="ignore", invalid="ignore"):
        score = (s * s) / nl + (sr * sr) / nr
    ok = (xs[:, :-1] < xs[:, 1:]) & (nl >= min_leaf) & (nr >= min_leaf)
    score = np.where(ok, score, -np.inf)
    flat = int(np.argmax(score))
    c, p = divmod(flat, m - 1)
    best = float(score[c, p])
    if best == -np.inf:
        return -1, -1, best
    return c, p, best


def tree_predict(feature, threshold, left, right, value, X):
    n = X.shape[0]
    node = np.zeros(n, dtype=np.intp)
    rows = np.arange(n)
    while True:
        f = feature[node]
        internal = f >= 0
        if not internal.any():
            break
        go_left = X[rows, np.where(internal, f, 0)] <= threshold[node]
        node = np.where(internal, np.where(go_left, left[node], right[node]), node)
    return value[node].astype(np.float64)
