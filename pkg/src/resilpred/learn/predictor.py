"""Trained predictors: whitening + column selection + (bagged) model, persistence, tuning pipeline."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .cv import CVResult, kfold_cv
from .models import (DEFAULT_GRIDS, MODEL_KINDS, ModelSpec, SingularSystemError, fit_model,
                     model_from_dict)
from .preprocess import Whitener, whiten_apply, whiten_fit
from .selection import grid_search, rank_features, top_k_sweep

FORMAT = "resilpred-model"
FORMAT_VERSION = 1
TARGETS = ("success", "interruption")


@dataclass
class TrainedPredictor:
    spec: ModelSpec
    whitener: Whitener
    selected: tuple[int, ...]
    ensemble: list
    target: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.whitener.d

    def raw_predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.d:
            raise ValueError(f"width mismatch: model expects {self.d} features, got {X.shape[1]}")
        Z = whiten_apply(self.whitener, X)[:, list(self.selected)]
        out = np.mean([m.predict(Z) for m in self.ensemble], axis=0)
        return out[0] if single else out

    def predict(self, X):
        """Ensemble mean, clamped to [0, 1]."""
        out = np.clip(self.raw_predict(X), 0.0, 1.0)
        return float(out) if np.ndim(out) == 0 else out

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "target": self.target,
            "spec": self.spec.to_dict(),
            "whitener": self.whitener.to_dict(),
            "selected": list(self.selected),
            "ensemble": [m.to_dict() for m in self.ensemble],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedPredictor":
        if d.get("format") != FORMAT:
            raise ValueError("not a model file")
        if int(d.get("version", 0)) > FORMAT_VERSION:
            raise ValueError(f"model format version {d['version']} is newer than supported")
        spec = ModelSpec.from_dict(d["spec"])
        return cls(spec, Whitener.from_dict(d["whitener"]), tuple(d["selected"]),
                   [model_from_dict(spec.kind, m) for m in d["ensemble"]],
                   d.get("target", ""), d.get("meta", {}))


def dumps(pred: TrainedPredictor) -> str:
    # repr-exact floats and sorted keys keep the file byte-reproducible
    return json.dumps(pred.to_dict(), sort_keys=True, indent=1) + "\n"


def loads(text: str) -> TrainedPredictor:
    return TrainedPredictor.from_dict(json.loads(text))


def save_model(pred: TrainedPredictor, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(pred))


def load_model(path) -> TrainedPredictor:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) == 0 or len(X) != len(y):
        raise ValueError("dataset must be a nonempty (rows, d) matrix with one target per row")
    return X, y


def train(spec: ModelSpec, X, y, seed: int = 0, selected=None, whiten: bool = True,
          target: str = "") -> TrainedPredictor:
    """Fit one model on the whitened (and optionally column-selected) data."""
    X, y = _check_xy(X, y)
    w = whiten_fit(X) if whiten else Whitener.identity(X.shape[1])
    cols = tuple(range(X.shape[1])) if selected is None else tuple(selected)
    Z = whiten_apply(w, X)[:, list(cols)]
    model = fit_model(spec, Z, y, np.random.default_rng([seed, 0]))
    return TrainedPredictor(spec, w, cols, [model], target)


def bagging_train(spec: ModelSpec, X, y, B: int, seed: int = 0, selected=None,
                  whiten: bool = True, whitener: Whitener | None = None,
                  target: str = "") -> TrainedPredictor:
    """``B`` members, member b fit on a bootstrap resample drawn from (seed, b)."""
    if B < 1:
        raise ValueError("bagging needs B >= 1")
    X, y = _check_xy(X, y)
    if whitener is not None:
        w = whitener
    else:
        w = whiten_fit(X) if whiten else Whitener.identity(X.shape[1])
    cols = tuple(range(X.shape[1])) if selected is None else tuple(selected)
    Z = whiten_apply(w, X)[:, list(cols)]
    n = len(y)
    members = []
    for b in range(B):
        rng = np.random.default_rng([seed, 0xBA, b])
        rows = rng.integers(0, n, size=n)
        members.append(fit_model(spec, Z[rows], y[rows], rng))
    return TrainedPredictor(spec, w, cols, members, target)


@dataclass
class PipelineConfig:
    kind: str = "auto"  # or one of MODEL_KINDS
    candidates: tuple = MODEL_KINDS
    grid: dict | None = None
    k_cv: int = 10
    bags: int = 10
    ks: list | None = None
    whiten: bool = True
    sweep_params: dict | None = None


def select_kind(X, y, kinds, k_cv: int = 10, seed: int = 0) -> tuple[str, dict]:
    """Model kind with the best CV accuracy at default hyperparameters; ties keep list order."""
    scores: dict[str, CVResult] = {}
    best, best_score = None, -math.inf
    for kind in kinds:
        try:
            res = kfold_cv(X, y, ModelSpec(kind), k_cv, seed)
        except SingularSystemError:
            res = CVResult(float("nan"), float("nan"), ())
        scores[kind] = res
        score = res.mean if not math.isnan(res.mean) else -math.inf
        if best is None or score > best_score:
            best, best_score = kind, score
    return best, scores


def fit_pipeline(X, y, seed: int = 0, config: PipelineConfig | None = None,
                 target: str = "") -> tuple[TrainedPredictor, dict]:
    """whiten -> rank/vote -> top-k sweep -> grid search -> bagging.

    With ``kind="auto"`` the model kind is first chosen by CV over
    ``candidates`` on all whitened features. Ranking runs on the raw
    columns; the whitener is symmetric so each whitened column stays tied
    to its raw feature index. Returns the predictor and a JSON-ready
    training report.
    """
    cfg = config or PipelineConfig()
    X, y = _check_xy(X, y)
    w = whiten_fit(X) if cfg.whiten else Whitener.identity(X.shape[1])
    Z = whiten_apply(w, X)
    kind_scores: dict = {}
    kind = cfg.kind
    if kind == "auto":
        kind, kind_scores = select_kind(Z, y, cfg.candidates, cfg.k_cv, seed)
    ranking = rank_features(X, y)
    grid = cfg.grid if cfg.grid is not None else DEFAULT_GRIDS[kind]
    base = dict(cfg.sweep_params or {}) if cfg.kind != "auto" else {}
    sweep = top_k_sweep(Z, y, ModelSpec(kind, base), ranking, cfg.ks, cfg.k_cv, seed)
    cols = list(sweep.selected)
    gs = grid_search(kind, grid, Z[:, cols], y, cfg.k_cv, seed, base=base)
    spec = ModelSpec(kind, {**base, **gs.best})
    final_cv = kfold_cv(Z[:, cols], y, spec, cfg.k_cv, seed)
    pred = bagging_train(spec, X, y, cfg.bags, seed, selected=cols, whitener=w, target=target)

    def num(v):
        return None if v is None or (isinstance(v, float) and math.isnan(v)) else v

    report = {
        "target": target,
        "rows": int(len(y)),
        "width": int(X.shape[1]),
        "model": spec.to_dict(),
        "model_selection": {k: {"mean": num(r.mean), "variance": num(r.variance)}
                            for k, r in kind_scores.items()},
        "ranking": ranking.to_dict(),
        "chosen_k": sweep.best_k,
        "selected": cols,
        "sweep": {str(k): {"mean": num(r.mean), "variance": num(r.variance)}
                  for k, r in sweep.curve.items()},
        "grid": [{"point": p, "mean": num(r.mean), "variance": num(r.variance)}
                 for p, r in gs.results],
        "chosen_grid_point": gs.best,
        "cv_mean": num(final_cv.mean),
        "cv_variance": num(final_cv.variance),
        "bags": cfg.bags,
        "seed": seed,
    }
    pred.meta = {"chosen_k": sweep.best_k, "cv_mean": num(final_cv.mean),
                 "cv_variance": num(final_cv.variance)}
    return pred, report
