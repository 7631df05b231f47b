"""Regression models: ridge, k-nearest neighbors, CART tree, random forest, gradient boosting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

MODEL_KINDS = ("ridge", "knn", "tree", "forest", "gbrt")

HYPERPARAMETERS = {
    "ridge": {"lambda": 0.1},
    "knn": {"k": 5},
    "tree": {"max_depth": 4, "min_leaf": 1},
    "forest": {"n_trees": 50, "max_depth": 4, "feature_subsample": 0.5},
    "gbrt": {"n_stages": 100, "learning_rate": 0.1, "max_depth": 2},
}

DEFAULT_GRIDS = {
    "gbrt": {"n_stages": [50, 100, 200], "learning_rate": [0.05, 0.1, 0.3], "max_depth": [2, 3]},
    "forest": {"n_trees": [50, 200], "max_depth": [4, 8]},
    "knn": {"k": [1, 3, 5, 9]},
    "ridge": {"lambda": [0, 0.01, 0.1, 1]},
    "tree": {"max_depth": [2, 4, 8], "min_leaf": [1, 3]},
}


class SingularSystemError(ValueError):
    """Ridge normal equations are singular (lambda=0 with collinear features)."""


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        allowed = HYPERPARAMETERS[self.kind]
        extra = set(self.hyperparameters) - set(allowed)
        if extra:
            raise ValueError(f"unknown hyperparameters for {self.kind}: {sorted(extra)}")
        merged = {**allowed, **self.hyperparameters}
        object.__setattr__(self, "hyperparameters", merged)
        _check(self.kind, merged)

    def with_params(self, **kw) -> "ModelSpec":
        return ModelSpec(self.kind, {**self.hyperparameters, **kw})

    def to_dict(self) -> dict:
        return {"kind": self.kind, "hyperparameters": dict(self.hyperparameters)}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(d["kind"], dict(d.get("hyperparameters", {})))


def _check(kind: str, hp: dict) -> None:
    def positive_int(name):
        v = hp[name]
        if int(v) != v or v < 1:
            raise ValueError(f"{kind}.{name} must be a positive integer, got {v!r}")
    if kind == "ridge" and hp["lambda"] < 0:
        raise ValueError("ridge.lambda must be >= 0")
    if kind == "knn":
        positive_int("k")
    if kind in ("tree", "forest", "gbrt"):
        positive_int("max_depth")
    if kind == "tree":
        positive_int("min_leaf")
    if kind == "forest":
        positive_int("n_trees")
        if not 0 < hp["feature_subsample"] <= 1:
            raise ValueError("forest.feature_subsample must lie in (0, 1]")
    if kind == "gbrt":
        positive_int("n_stages")
        if not hp["learning_rate"] > 0:
            raise ValueError("gbrt.learning_rate must be > 0")


# --------------------------------------------------------------------------- ridge

class Ridge:
    kind = "ridge"

    def __init__(self, lam: float = 0.1):
        self.lam = float(lam)
        self.coef = np.zeros(0)
        self.intercept = 0.0

    def fit(self, X, y, rng=None) -> "Ridge":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        xm, ym = X.mean(axis=0), y.mean()
        Xc = X - xm
        A = Xc.T @ Xc + self.lam * np.eye(X.shape[1])
        b = Xc.T @ (y - ym)
        if self.lam == 0 and (X.shape[1] > 0 and np.linalg.cond(A) > 1e12):
            raise SingularSystemError("singular normal equations: lambda=0 with collinear features")
        self.coef = np.linalg.solve(A, b) if X.shape[1] else np.zeros(0)
        self.intercept = float(ym - xm @ self.coef)
        return self

    def predict(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef + self.intercept

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "coef": self.coef.tolist(), "intercept": self.intercept}

    @classmethod
    def from_dict(cls, d: dict) -> "Ridge":
        m = cls(d["lambda"])
        m.coef = np.asarray(d["coef"], dtype=float)
        m.intercept = float(d["intercept"])
        return m


# --------------------------------------------------------------------------- knn

class KNN:
    kind = "knn"

    def __init__(self, k: int = 5):
        self.k = int(k)
        self.X = np.zeros((0, 0))
        self.y = np.zeros(0)

    def fit(self, X, y, rng=None) -> "KNN":
        self.X = np.array(X, dtype=float)
        self.y = np.array(y, dtype=float)
        return self

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        d2 = _kernels.sq_dists(X, self.X)
        k = min(self.k, len(self.y))
        # stable sort: equal distances go to the lower training index
        nn = np.argsort(d2, axis=1, kind="stable")[:, :k]
        return self.y[nn].mean(axis=1)

    def to_dict(self) -> dict:
        return {"k": self.k, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "KNN":
        m = cls(d["k"])
        m.X = np.asarray(d["X"], dtype=float).reshape(len(d["y"]), -1)
        m.y = np.asarray(d["y"], dtype=float)
        return m


# --------------------------------------------------------------------------- trees

class Tree:
    """Least-squares regression tree in flat-array form (feature -1 marks a leaf)."""

    kind = "tree"

    def __init__(self, max_depth: int = 4, min_leaf: int = 1, feature_subsample: float = 1.0):
        self.max_depth = int(max_depth)
        self.min_leaf = int(min_leaf)
        self.feature_subsample = float(feature_subsample)
        self.feature = np.zeros(0, dtype=np.int64)
        self.threshold = np.zeros(0)
        self.left = np.zeros(0, dtype=np.int64)
        self.right = np.zeros(0, dtype=np.int64)
        self.value = np.zeros(0)

    def fit(self, X, y, rng: np.random.Generator | None = None, rows=None) -> "Tree":
        X = np.ascontiguousarray(X, dtype=float)
        y = np.ascontiguousarray(y, dtype=float)
        d = X.shape[1]
        m = max(1, math.ceil(self.feature_subsample * d)) if d else 0
        all_feats = np.arange(d, dtype=np.int64)
        feat, thr, left, right, val = [], [], [], [], []
        rows = np.arange(len(y), dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
        stack = [(rows, 0, -1, False)]
        while stack:
            r, depth, parent, is_right = stack.pop()
            node = len(feat)
            if parent >= 0:
                (right if is_right else left)[parent] = node
            feat.append(-1)
            thr.append(0.0)
            left.append(-1)
            right.append(-1)
            val.append(float(y[r].mean()))
            if depth >= self.max_depth or len(r) < 2 * self.min_leaf or d == 0:
                continue
            if m < d:
                if rng is None:
                    raise ValueError("feature subsampling needs a generator")
                feats = np.sort(rng.choice(d, size=m, replace=False)).astype(np.int64)
            else:
                feats = all_feats
            f, t, _gain = _kernels.best_split(X, y, r, feats, self.min_leaf)
            if f < 0:
                continue
            feat[node], thr[node] = f, t
            go = X[r, f] <= t
            # right pushed first so the left subtree is numbered first
            stack.append((r[~go], depth + 1, node, True))
            stack.append((r[go], depth + 1, node, False))
        self.feature = np.asarray(feat, dtype=np.int64)
        self.threshold = np.asarray(thr, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(val, dtype=float)
        return self

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return _kernels.tree_predict(self.feature, self.threshold, self.left, self.right,
                                     self.value, X)

    def to_dict(self) -> dict:
        return {"max_depth": self.max_depth, "min_leaf": self.min_leaf,
                "feature_subsample": self.feature_subsample,
                "feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
                "left": self.left.tolist(), "right": self.right.tolist(),
                "value": self.value.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        t = cls(d["max_depth"], d["min_leaf"], d.get("feature_subsample", 1.0))
        t.feature = np.asarray(d["feature"], dtype=np.int64)
        t.threshold = np.asarray(d["threshold"], dtype=float)
        t.left = np.asarray(d["left"], dtype=np.int64)
        t.right = np.asarray(d["right"], dtype=np.int64)
        t.value = np.asarray(d["value"], dtype=float)
        return t


class Forest:
    """Bagged trees with a fresh feature subsample at every split."""

    kind = "forest"

    def __init__(self, n_trees: int = 50, max_depth: int = 4, feature_subsample: float = 0.5):
        self.n_trees = int(n_trees)
        self.max_depth = int(max_depth)
        self.feature_subsample = float(feature_subsample)
        self.trees: list[Tree] = []

    def fit(self, X, y, rng: np.random.Generator) -> "Forest":
        X = np.ascontiguousarray(X, dtype=float)
        y = np.ascontiguousarray(y, dtype=float)
        n = len(y)
        seeds = rng.integers(0, 2**63 - 1, size=self.n_trees)
        self.trees = []
        for s in seeds:
            r = np.random.default_rng(int(s))
            rows = np.sort(r.integers(0, n, size=n))
            t = Tree(self.max_depth, 1, self.feature_subsample)
            self.trees.append(t.fit(X, y, r, rows=rows))
        return self

    def predict(self, X) -> np.ndarray:
        return np.mean([t.predict(X) for t in self.trees], axis=0)

    def to_dict(self) -> dict:
        return {"n_trees": self.n_trees, "max_depth": self.max_depth,
                "feature_subsample": self.feature_subsample,
                "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "Forest":
        f = cls(d["n_trees"], d["max_depth"], d["feature_subsample"])
        f.trees = [Tree.from_dict(t) for t in d["trees"]]
        return f


class GBRT:
    """Stage-wise least-squares boosting: mean start, then shrunken trees on residuals."""

    kind = "gbrt"

    def __init__(self, n_stages: int = 100, learning_rate: float = 0.1, max_depth: int = 2):
        self.n_stages = int(n_stages)
        self.learning_rate = float(learning_rate)
        self.max_depth = int(max_depth)
        self.init = 0.0
        self.trees: list[Tree] = []
        self.train_loss: list[float] = []

    def fit(self, X, y, rng=None) -> "GBRT":
        X = np.ascontiguousarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        self.init = float(y.mean())
        F = np.full(len(y), self.init)
        self.trees = []
        self.train_loss = [float(np.mean((y - F) ** 2))]
        for _ in range(self.n_stages):
            t = Tree(self.max_depth, 1).fit(X, y - F)
            F = F + self.learning_rate * t.predict(X)
            self.trees.append(t)
            self.train_loss.append(float(np.mean((y - F) ** 2)))
        return self

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full(X.shape[0], self.init)
        for t in self.trees:
            out = out + self.learning_rate * t.predict(X)
        return out

    def to_dict(self) -> dict:
        return {"n_stages": self.n_stages, "learning_rate": self.learning_rate,
                "max_depth": self.max_depth, "init": self.init,
                "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "GBRT":
        g = cls(d["n_stages"], d["learning_rate"], d["max_depth"])
        g.init = float(d["init"])
        g.trees = [Tree.from_dict(t) for t in d["trees"]]
        return g


_CLASSES = {"ridge": Ridge, "knn": KNN, "tree": Tree, "forest": Forest, "gbrt": GBRT}


def make_model(spec: ModelSpec):
    hp = spec.hyperparameters
    if spec.kind == "ridge":
        return Ridge(hp["lambda"])
    if spec.kind == "knn":
        return KNN(hp["k"])
    if spec.kind == "tree":
        return Tree(hp["max_depth"], hp["min_leaf"])
    if spec.kind == "forest":
        return Forest(hp["n_trees"], hp["max_depth"], hp["feature_subsample"])
    return GBRT(hp["n_stages"], hp["learning_rate"], hp["max_depth"])


def fit_model(spec: ModelSpec, X, y, rng: np.random.Generator):
    return make_model(spec).fit(X, y, rng)


def model_from_dict(kind: str, d: dict):
    return _CLASSES[kind].from_dict(d)
