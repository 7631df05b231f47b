"""Feature ranking by voting, top-k sweep, grid search."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .cv import CVResult, kfold_cv
from .models import ModelSpec, SingularSystemError


@dataclass(frozen=True)
class FeatureRanking:
    """Per-method orders (best first) and 1-based rank positions.

    ``global_order`` sorts features by summed rank, lower index first on ties.
    """

    variance: tuple[int, ...]
    p_value: tuple[int, ...]
    mutual_information: tuple[int, ...]
    scores: tuple[int, ...]
    global_order: tuple[int, ...]

    def ranks(self, method: str) -> np.ndarray:
        order = getattr(self, method)
        r = np.empty(len(order), dtype=int)
        r[list(order)] = np.arange(1, len(order) + 1)
        return r

    def to_dict(self) -> dict:
        return {k: list(getattr(self, k)) for k in
                ("variance", "p_value", "mutual_information", "scores", "global_order")}


def pearson_pvalues(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two-sided t-test p-value of each column's Pearson correlation with y.

    Constant columns (or constant y) get r=0, p=1.
    """
    n = len(y)
    xc = X - X.mean(axis=0)
    yc = y - y.mean()
    sx = np.sqrt((xc * xc).sum(axis=0))
    sy = math.sqrt(float(yc @ yc))
    r = np.zeros(X.shape[1])
    ok = (sx > 0) & (sy > 0)
    r[ok] = (xc[:, ok].T @ yc) / (sx[ok] * sy)
    r = np.clip(r, -1.0, 1.0)
    df = n - 2
    with np.errstate(divide="ignore"):
        t = np.abs(r) * np.sqrt(df / np.maximum(1.0 - r * r, 0.0))
    p = 2.0 * stats.t.sf(t, df)
    p[~ok] = 1.0
    return p, r


def mutual_information(x: np.ndarray, y: np.ndarray, bins: int | None = None) -> float:
    """Plug-in MI (nats) on an equal-width grid of ``bins`` per axis (default ceil(sqrt(n)))."""
    n = len(x)
    b = bins if bins is not None else math.ceil(math.sqrt(n))

    def codes(v):
        lo, hi = float(v.min()), float(v.max())
        if hi <= lo:
            return np.zeros(n, dtype=np.int64)
        return np.minimum(((v - lo) / (hi - lo) * b).astype(np.int64), b - 1)

    joint = np.zeros((b, b))
    np.add.at(joint, (codes(x), codes(y)), 1.0)
    pxy = joint / n
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    nz = pxy > 0
    return float(max(0.0, (pxy[nz] * np.log(pxy[nz] / (px @ py)[nz])).sum()))


def rank_features(X, y, bins: int | None = None) -> FeatureRanking:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] < 3:
        raise ValueError("ranking needs at least 3 rows")
    d = X.shape[1]
    idx = range(d)
    var = X.var(axis=0, ddof=1)
    p, r = pearson_pvalues(X, y)
    mi = [mutual_information(X[:, j], y, bins) for j in idx]
    by_var = tuple(sorted(idx, key=lambda j: (-var[j], j)))
    by_p = tuple(sorted(idx, key=lambda j: (p[j], -abs(r[j]), j)))
    by_mi = tuple(sorted(idx, key=lambda j: (-mi[j], j)))
    score = np.zeros(d, dtype=int)
    for order in (by_var, by_p, by_mi):
        for pos, j in enumerate(order, start=1):
            score[j] += pos
    glob = tuple(sorted(idx, key=lambda j: (score[j], j)))
    return FeatureRanking(by_var, by_p, by_mi, tuple(int(s) for s in score), glob)


@dataclass(frozen=True)
class SweepResult:
    best_k: int
    selected: tuple[int, ...]
    curve: dict  # k -> CVResult


def top_k_sweep(X, y, spec: ModelSpec, ranking: FeatureRanking, ks=None,
                k_cv: int = 10, seed: int = 0) -> SweepResult:
    """Cross-validate the top-k globally ranked features for each k; ties go to smaller k."""
    X = np.asarray(X, dtype=float)
    d = X.shape[1]
    ks = list(range(2, d + 1)) if ks is None else sorted(set(ks))
    if not ks:
        ks = [d]
    curve: dict[int, CVResult] = {}
    best_k, best = ks[0], -math.inf
    for k in ks:
        cols = list(ranking.global_order[:k])
        try:
            res = kfold_cv(X[:, cols], y, spec, k_cv, seed)
        except SingularSystemError:
            res = CVResult(float("nan"), float("nan"), ())
        curve[k] = res
        score = res.mean if not math.isnan(res.mean) else -math.inf
        if score > best:
            best_k, best = k, score
    return SweepResult(best_k, tuple(ranking.global_order[:best_k]), curve)


def grid_points(grid: dict) -> list[dict]:
    """Cartesian product of the grid in the given key and value order."""
    if not grid:
        raise ValueError("empty grid")
    keys = list(grid)
    for k in keys:
        if not len(grid[k]):
            raise ValueError(f"empty value list for {k!r}")
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


@dataclass(frozen=True)
class GridResult:
    best: dict
    results: tuple[tuple[dict, CVResult], ...]


def grid_search(kind: str, grid: dict, X, y, k_cv: int = 10, seed: int = 0,
                base: dict | None = None) -> GridResult:
    """Exhaustive CV over the grid; ties keep the earliest point."""
    results = []
    best, best_score = None, -math.inf
    for point in grid_points(grid):
        spec = ModelSpec(kind, {**(base or {}), **point})
        try:
            res = kfold_cv(X, y, spec, k_cv, seed)
        except SingularSystemError:
            # an unusable point (e.g. unregularized ridge on collinear columns) cannot win
            res = CVResult(float("nan"), float("nan"), ())
        results.append((point, res))
        score = res.mean if not math.isnan(res.mean) else -math.inf
        if best is None or score > best_score:
            best, best_score = point, score
    return GridResult(dict(best), tuple(results))
