# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tree kernels. Must stay bit-compatible with _pykernels.py."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def split_scan(const double[:, ::1] xs, const double[:, ::1] ys, Py_ssize_t min_leaf):
    """Best (column, position, score) over sorted candidate columns.

    Row ``c`` of ``xs``/``ys`` holds one feature's values and the targets in
    ascending feature order. A split after ``pos`` sends rows ``0..pos`` left.
    Score is ``sL^2/nL + sR^2/nR``; the first maximum in row-major order wins.
    Returns ``(-1, -1, -inf)`` when no split is admissible.
    """
    cdef Py_ssize_t k = xs.shape[0], m = xs.shape[1]
    cdef Py_ssize_t c, p
    cdef Py_ssize_t best_c = -1, best_p = -1
    cdef double best = -np.inf
    cdef double s, total, sr, nl, nr, score
    with nogil:
        for c in range(k):
            total = 0.0
            for p in range(m):
                total = total + ys[c, p]
            s = 0.0
            for p in range(m - 1):
                s = s + ys[c, p]
                if p + 1 < min_leaf or m - p - 1 < min_leaf:
                    continue
                if not (xs[c, p] < xs[c, p + 1]):
                    continue
                nl = <double>(p + 1)
                nr = <double>(m - p - 1)
                sr = total - s
                score = (s * s) / nl + (sr * sr) / nr
                if score > best:
                    best = score
                    best_c = c
                    best_p = p
    return best_c, best_p, best


def tree_predict(const cnp.intp_t[::1] feature, const double[::1] threshold,
                 const cnp.intp_t[::1] left, const cnp.intp_t[::1] right,
                 const double[::1] value, const double[:, ::1] X):
    cdef Py_ssize_t n = X.shape[0], r, node
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for r in range(n):
            node = 0
            while feature[node] >= 0:
                if X[r, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            o[r] = value[node]
    return out
