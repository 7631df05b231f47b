"""Hot loops of the learners, compiled with numba when available.

Set ``RESILPRED_NUMBA=0`` to force the pure-numpy versions. Both backends
perform the same floating-point operations in the same order, so split
choices agree exactly.
"""

from __future__ import annotations

import os

import numpy as np

MIN_GAIN = 1e-12


def _midpoint(a: float, b: float) -> float:
    # the midpoint of adjacent floats can round up to b, which would empty the right side
    m = 0.5 * (a + b)
    return float(a) if m >= b else float(m)


def _best_split_np(X, y, rows, feats, min_leaf):
    best_f, best_thr, best_gain = -1, 0.0, MIN_GAIN
    n = rows.shape[0]
    if n < 2 * min_leaf:
        return best_f, best_thr, 0.0
    for f in feats:
        xs = X[rows, f]
        order = np.argsort(xs, kind="mergesort")
        xs = xs[order]
        cs = np.cumsum(y[rows][order])
        total = cs[n - 1]
        base = total * total / n
        i = np.arange(min_leaf, n - min_leaf + 1)
        ok = xs[i - 1] < xs[np.minimum(i, n - 1)]
        ok &= i < n
        if not ok.any():
            continue
        i = i[ok]
        sl = cs[i - 1]
        sr = total - sl
        gain = sl * sl / i + sr * sr / (n - i) - base
        j = int(np.argmax(gain))
        if gain[j] > best_gain:
            best_f, best_gain = int(f), float(gain[j])
            k = i[j]
            best_thr = _midpoint(xs[k - 1], xs[k])
    return best_f, best_thr, (best_gain if best_f >= 0 else 0.0)


def _tree_predict_np(feature, threshold, left, right, value, X):
    node = np.zeros(X.shape[0], dtype=np.int64)
    active = feature[node] >= 0
    while active.any():
        idx = np.nonzero(active)[0]
        nd = node[idx]
        go_left = X[idx, feature[nd]] <= threshold[nd]
        node[idx] = np.where(go_left, left[nd], right[nd])
        active = feature[node] >= 0
    return value[node]


def _sq_dists_np(A, B):
    diff = A[:, None, :] - B[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _njit_versions():
    from numba import njit

    @njit(cache=True)
    def best_split(X, y, rows, feats, min_leaf):
        best_f, best_thr, best_gain = -1, 0.0, MIN_GAIN
        n = rows.shape[0]
        if n < 2 * min_leaf:
            return best_f, best_thr, 0.0
        xs = np.empty(n)
        ys = np.empty(n)
        for f in feats:
            for r in range(n):
                xs[r] = X[rows[r], f]
            order = np.argsort(xs, kind="mergesort")
            xo = xs[order]
            for r in range(n):
                ys[r] = y[rows[order[r]]]
            cs = np.cumsum(ys)
            total = cs[n - 1]
            base = total * total / n
            fg, fk = MIN_GAIN, -1
            for i in range(min_leaf, n - min_leaf + 1):
                if i >= n or not xo[i - 1] < xo[i]:
                    continue
                sl = cs[i - 1]
                sr = total - sl
                g = sl * sl / i + sr * sr / (n - i) - base
                if fk < 0 or g > fg:
                    fg, fk = g, i
            if fk >= 0 and fg > best_gain:
                best_f, best_gain = f, fg
                best_thr = 0.5 * (xo[fk - 1] + xo[fk])
                if best_thr >= xo[fk]:
                    best_thr = xo[fk - 1]
        return best_f, best_thr, (best_gain if best_f >= 0 else 0.0)

    @njit(cache=True)
    def tree_predict(feature, threshold, left, right, value, X):
        out = np.empty(X.shape[0])
        for r in range(X.shape[0]):
            nd = 0
            while feature[nd] >= 0:
                if X[r, feature[nd]] <= threshold[nd]:
                    nd = left[nd]
                else:
                    nd = right[nd]
            out[r] = value[nd]
        return out

    @njit(cache=True)
    def sq_dists(A, B):
        out = np.empty((A.shape[0], B.shape[0]))
        for i in range(A.shape[0]):
            for j in range(B.shape[0]):
                s = 0.0
                for k in range(A.shape[1]):
                    d = A[i, k] - B[j, k]
                    s += d * d
                out[i, j] = s
        return out

    return best_split, tree_predict, sq_dists


def _select():
    if os.environ.get("RESILPRED_NUMBA", "1") != "0":
        try:
            return ("numba", *_njit_versions())
        except ImportError:
            pass
    return "numpy", _best_split_np, _tree_predict_np, _sq_dists_np


BACKEND, _best_split, _tree_predict, _sq_dists = _select()


def best_split(X: np.ndarray, y: np.ndarray, rows: np.ndarray, feats: np.ndarray,
               min_leaf: int) -> tuple[int, float, float]:
    """Least-squares split of ``rows`` over candidate ``feats``.

    Returns ``(feature, threshold, gain)`` with feature -1 when no split
    leaves ``min_leaf`` rows on each side and reduces the squared error.
    The first feature in ``feats`` order wins ties.
    """
    f, thr, gain = _best_split(X, y, rows.astype(np.int64), feats.astype(np.int64), int(min_leaf))
    return int(f), float(thr), float(gain)


def tree_predict(feature, threshold, left, right, value, X) -> np.ndarray:
    return _tree_predict(feature, threshold, left, right, value, np.ascontiguousarray(X, dtype=float))


def sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return _sq_dists(np.ascontiguousarray(A, dtype=float), np.ascontiguousarray(B, dtype=float))
