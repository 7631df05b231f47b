"""Feature whitening."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EIG_FLOOR = 1e-8


@dataclass
class Whitener:
    mean: np.ndarray
    matrix: np.ndarray  # (d, d); x' = (x - mean) @ matrix

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "matrix": self.matrix.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Whitener":
        return cls(np.asarray(d["mean"], dtype=float), np.asarray(d["matrix"], dtype=float))

    @classmethod
    def identity(cls, d: int) -> "Whitener":
        return cls(np.zeros(d), np.eye(d))


def whiten_fit(X: np.ndarray, eps: float = EIG_FLOOR) -> Whitener:
    """Symmetric (ZCA) PCA whitening of the sample covariance.

    Eigen-directions with variance <= ``eps`` are dropped, so constant or
    redundant columns map to 0 instead of blowing up. The symmetric form
    keeps whitened column j anchored to raw feature j, which lets feature
    selection act on whitened columns.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("whitening needs at least 2 rows")
    mean = X.mean(axis=0)
    # SVD of the centered data rather than eigh of its covariance: the
    # covariance squares the condition number, which costs about five
    # digits when feature scales differ by 1e3.
    _, s, vt = np.linalg.svd(X - mean, full_matrices=False)
    vals = s * s / (X.shape[0] - 1)
    keep = vals > eps
    scale = np.zeros_like(vals)
    scale[keep] = 1.0 / np.sqrt(vals[keep])
    W = (vt.T * scale) @ vt
    return Whitener(mean, W)


def whiten_apply(w: Whitener, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != w.d:
        raise ValueError(f"width mismatch: expected {w.d} features, got {X.shape[-1]}")
    return (X - w.mean) @ w.matrix
