"""Prediction accuracy metric and k-fold cross-validation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .models import ModelSpec, fit_model

Metric = Callable[[float, float], Optional[float]]


def prediction_accuracy(p_rate: float, o_rate: float) -> float | None:
    """1 - |p - o| / o; None (reported as N/A) when the observed rate is 0."""
    if o_rate == 0:
        return None
    return 1.0 - abs(p_rate - o_rate) / o_rate


def mean_accuracy(pred, obs, metric: Metric = prediction_accuracy) -> float | None:
    """Mean of the defined per-row accuracies; None if no row is defined."""
    vals = [a for p, o in zip(pred, obs) if (a := metric(float(p), float(o))) is not None]
    return float(np.mean(vals)) if vals else None


def fold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle cut into ``k`` folds whose sizes differ by at most one."""
    if k < 2:
        raise ValueError("need k >= 2 folds")
    if n < k:
        raise ValueError(f"{n} rows cannot fill {k} folds")
    perm = np.random.default_rng([seed, 0xCF]).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, k)]


@dataclass(frozen=True)
class CVResult:
    mean: float
    variance: float
    fold_means: tuple[float | None, ...]


def kfold_cv(X, y, spec: ModelSpec, k: int = 10, seed: int = 0,
             metric: Metric = prediction_accuracy, clamp: bool = True) -> CVResult:
    """Mean and (population) variance of per-fold mean accuracy.

    Each fold's model gets its own generator derived from (seed, fold);
    folds without a defined accuracy are left out of both aggregates.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    folds = fold_indices(len(y), k, seed)
    means: list[float | None] = []
    for i, test in enumerate(folds):
        train = np.setdiff1d(np.arange(len(y)), test)
        model = fit_model(spec, X[train], y[train], np.random.default_rng([seed, i]))
        pred = model.predict(X[test])
        if clamp:
            pred = np.clip(pred, 0.0, 1.0)
        means.append(mean_accuracy(pred, y[test], metric))
    defined = [m for m in means if m is not None]
    if not defined:
        return CVResult(float("nan"), float("nan"), tuple(means))
    return CVResult(float(np.mean(defined)), float(np.var(defined)), tuple(means))
