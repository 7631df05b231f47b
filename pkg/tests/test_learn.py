import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resilpred.learn import (GBRT, KNN, CVResult, ModelSpec, PipelineConfig, Ridge,
                             SingularSystemError, TrainedPredictor, Tree, Whitener,
                             bagging_train, fit_model, fit_pipeline, fold_indices, grid_search,
                             kfold_cv, prediction_accuracy, rank_features, top_k_sweep, train,
                             whiten_apply, whiten_fit)
from resilpred.learn import _kernels
from resilpred.learn.predictor import FORMAT_VERSION, dumps, loads
from resilpred.learn.selection import grid_points, mutual_information


def rng(s=0):
    return np.random.default_rng(s)


# --------------------------------------------------------------------------- whitening

def test_white_data_gives_near_identity():
    g = rng(1)
    Z = g.standard_normal((20000, 3))
    Z = (Z - Z.mean(0)) @ np.linalg.inv(np.linalg.cholesky(np.cov(Z, rowvar=False)).T)
    w = whiten_fit(Z)
    assert np.allclose(w.matrix, np.eye(3), atol=1e-8)


def test_diagonal_covariance_is_whitened():
    g = rng(2)
    X = g.standard_normal((500, 2)) * [2.0, 1.0]
    Z = whiten_apply(whiten_fit(X), X)
    assert np.allclose(Z.mean(0), 0, atol=1e-12)
    assert np.linalg.norm(np.cov(Z, rowvar=False) - np.eye(2)) < 1e-6


def test_constant_column_maps_to_zero():
    g = rng(3)
    X = np.column_stack([g.standard_normal(50), np.full(50, 7.0)])
    Z = whiten_apply(whiten_fit(X), X)
    assert np.all(np.isfinite(Z)) and np.allclose(Z[:, 1], 0)


def test_whitening_needs_two_rows():
    with pytest.raises(ValueError):
        whiten_fit(np.ones((1, 3)))


def test_whitener_width_mismatch():
    with pytest.raises(ValueError, match="width"):
        whiten_apply(Whitener.identity(3), np.ones((2, 4)))


# --------------------------------------------------------------------------- models

def test_unknown_hyperparameter_rejected():
    with pytest.raises(ValueError):
        ModelSpec("knn", {"depth": 3})
    with pytest.raises(ValueError):
        ModelSpec("svm")


def test_knn_one_recovers_training_targets():
    g = rng(4)
    X, y = g.random((30, 4)), g.random(30)
    m = KNN(1).fit(X, y)
    assert np.array_equal(m.predict(X), y)


def test_knn_mean_of_equidistant_neighbors():
    X = np.array([[1.0, 0], [-1.0, 0], [0, 1.0], [5.0, 5.0]])
    m = KNN(3).fit(X, [0.2, 0.4, 0.9, 0.0])
    assert m.predict([[0.0, 0.0]])[0] == pytest.approx(0.5)


def test_ridge_exact_linear():
    g = rng(5)
    X = g.standard_normal((40, 2))
    y = 3 * X[:, 0] - 2 * X[:, 1]
    m = Ridge(0.0).fit(X, y)
    assert np.allclose(m.coef, [3, -2], atol=1e-9) and abs(m.intercept) < 1e-9


def test_ridge_singular_is_explicit():
    x = np.arange(10.0)
    with pytest.raises(SingularSystemError):
        Ridge(0.0).fit(np.column_stack([x, 2 * x]), x)


def test_gbrt_fits_line_monotonically():
    X = np.arange(10.0)[:, None]
    m = GBRT(200, 0.1, 1).fit(X, 2 * X[:, 0])
    assert m.train_loss[-1] < 1e-3
    assert all(b <= a + 1e-15 for a, b in zip(m.train_loss, m.train_loss[1:]))


def test_tree_depth_zero_is_the_mean():
    X, y = rng(6).random((20, 2)), rng(7).random(20)
    assert np.allclose(Tree(0, 1).fit(X, y).predict(X), y.mean())


def test_tree_separates_step():
    X = np.linspace(0, 1, 40)[:, None]
    y = (X[:, 0] > 0.5).astype(float)
    assert np.array_equal(Tree(1, 1).fit(X, y).predict(X), y)


@pytest.mark.parametrize("kind", ["knn", "gbrt"])
def test_row_order_invariance(kind):
    g = rng(8)
    X, y = g.random((40, 3)), g.random(40)
    perm = g.permutation(40)
    a = fit_model(ModelSpec(kind), X, y, rng(0)).predict(X)
    b = fit_model(ModelSpec(kind), X[perm], y[perm], rng(0)).predict(X)
    assert np.allclose(a, b, atol=1e-12)


@pytest.mark.skipif(_kernels.BACKEND != "numba", reason="numba not installed")
@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_backends_pick_the_same_split(seed, min_leaf):
    g = rng(seed)
    X = np.round(g.random((60, 4)), 2)  # rounding creates ties
    y = g.random(60)
    rows = np.sort(g.choice(60, 45, replace=False)).astype(np.int64)
    feats = np.arange(4, dtype=np.int64)
    a = _kernels._best_split_np(X, y, rows, feats, min_leaf)
    b = _kernels._best_split(X, y, rows, feats, min_leaf)
    assert (int(a[0]), float(a[1])) == (int(b[0]), float(b[1]))
    assert a[2] == pytest.approx(b[2], rel=1e-12, abs=1e-15)


# --------------------------------------------------------------------------- metric and CV

def test_accuracy_examples():
    assert prediction_accuracy(0.701, 0.653) == pytest.approx(0.926, abs=1e-3)
    assert prediction_accuracy(0.4, 0.4) == 1.0
    assert prediction_accuracy(0.0, 0.5) == 0.0
    assert prediction_accuracy(0.3, 0.0) is None
    assert prediction_accuracy(1.0, 0.1) < 0


@given(st.floats(0.01, 1), st.floats(0, 1), st.floats(0, 1))
def test_accuracy_decreases_with_error(o, d1, d2):
    lo, hi = sorted([d1, d2])
    assert prediction_accuracy(o + lo, o) >= prediction_accuracy(o + hi, o)
    assert (prediction_accuracy(o + lo, o) == 1.0) == (o + lo == o)


@given(st.integers(2, 60), st.integers(2, 12), st.integers(0, 1000))
def test_fold_partition(n, k, seed):
    if n < k:
        with pytest.raises(ValueError):
            fold_indices(n, k, seed)
        return
    folds = fold_indices(n, k, seed)
    assert sorted(np.concatenate(folds).tolist()) == list(range(n))
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1


def test_constant_target_cv_is_perfect():
    X = rng(9).random((30, 3))
    r = kfold_cv(X, np.full(30, 0.4), ModelSpec("ridge"), 10)
    assert r.mean == pytest.approx(1.0) and r.variance == pytest.approx(0.0, abs=1e-20)


def test_leave_one_out():
    X = rng(10).random((12, 2))
    r = kfold_cv(X, X[:, 0] + 0.5, ModelSpec("knn", {"k": 2}), k=12)
    assert len(r.fold_means) == 12


def test_cv_deterministic():
    X = rng(11).random((40, 3))
    y = X.sum(1) / 3
    assert kfold_cv(X, y, ModelSpec("forest", {"n_trees": 5}), 5, 3) == \
        kfold_cv(X, y, ModelSpec("forest", {"n_trees": 5}), 5, 3)


# --------------------------------------------------------------------------- ranking

def test_rank_finds_the_informative_feature():
    g = rng(12)
    X = g.random((200, 6))
    y = X[:, 3].copy()
    r = rank_features(X, y)
    assert r.p_value[0] == 3 and r.mutual_information[0] == 3


def test_constant_feature_ranks_last_with_zero_mi():
    g = rng(13)
    X = np.column_stack([g.random(50), np.zeros(50), g.random(50)])
    y = g.random(50)
    r = rank_features(X, y)
    assert r.variance[-1] == 1
    assert mutual_information(X[:, 1], y) == 0.0


def test_vote_sums_ranks_and_breaks_ties_by_index():
    g = rng(14)
    X, y = g.random((40, 5)), g.random(40)
    r = rank_features(X, y)
    total = r.ranks("variance") + r.ranks("p_value") + r.ranks("mutual_information")
    assert list(r.scores) == total.tolist()
    assert list(r.global_order) == sorted(range(5), key=lambda j: (total[j], j))


def test_ranking_needs_three_rows():
    with pytest.raises(ValueError):
        rank_features(np.ones((2, 2)), np.ones(2))


def test_duplicating_rows_keeps_rankings():
    # MI levels chosen so the order survives the change from 4 to 6 bins per axis:
    # identity, a half split aligned with both grids, parity, and a constant
    y = np.arange(16, dtype=float)
    X = np.column_stack([y, (y >= 8).astype(float), y % 2, np.zeros(16)])
    a = rank_features(X, y)
    b = rank_features(np.vstack([X, X]), np.concatenate([y, y]))
    assert a.variance == b.variance and a.p_value == b.p_value
    assert a.mutual_information == b.mutual_information
    assert a.global_order == b.global_order


# --------------------------------------------------------------------------- sweep and grid

def _informative(seed=16, n=60, d=6):
    g = rng(seed)
    X = g.random((n, d))
    return X, 0.2 + 0.6 * X[:, 2]


def test_sweep_prefers_few_features():
    X, y = _informative()
    r = rank_features(X, y)
    s = top_k_sweep(X, y, ModelSpec("ridge", {"lambda": 1e-6}), r, k_cv=5)
    assert s.selected[0] == 2 and s.best_k == 2
    assert X.shape[1] in s.curve
    assert s.curve == top_k_sweep(X, y, ModelSpec("ridge", {"lambda": 1e-6}), r, k_cv=5).curve


def test_grid_points_order_and_count():
    pts = grid_points({"a": [1, 2], "b": [3, 4, 5]})
    assert len(pts) == 6 and pts[0] == {"a": 1, "b": 3} and pts[1] == {"a": 1, "b": 4}


def test_singleton_grid():
    X, y = _informative()
    assert grid_search("knn", {"k": [3]}, X, y, 5).best == {"k": 3}


def test_grid_prefers_one_nn_on_clusters():
    g = rng(17)
    centers = g.random((30, 2)) * 100
    X = np.repeat(centers, 2, axis=0) + g.normal(0, 0.01, (60, 2))
    y = np.repeat(g.uniform(0.1, 0.9, 30), 2)
    gs = grid_search("knn", {"k": [1, 5, 25]}, X, y, 5)
    assert gs.best == {"k": 1} and len(gs.results) == 3


def test_grid_survives_singular_point():
    x = np.arange(20.0)
    X = np.column_stack([x, 2 * x])
    gs = grid_search("ridge", {"lambda": [0, 0.1]}, X, 0.01 * x + 0.1, 5)
    assert gs.best == {"lambda": 0.1} and math.isnan(gs.results[0][1].mean)


# --------------------------------------------------------------------------- bagging and predictor

def test_bagging_single_member_is_a_bootstrap_fit():
    X, y = _informative()
    p = bagging_train(ModelSpec("tree"), X, y, 1, seed=5, whiten=False)
    g = np.random.default_rng([5, 0xBA, 0])
    rows = g.integers(0, len(y), size=len(y))
    m = fit_model(ModelSpec("tree"), X[rows], y[rows], g)
    assert np.array_equal(p.raw_predict(X), m.predict(X))


def test_bagged_output_lies_between_members():
    X, y = _informative()
    p = bagging_train(ModelSpec("tree"), X, y, 7, seed=1)
    Z = whiten_apply(p.whitener, X)
    member = np.array([m.predict(Z) for m in p.ensemble])
    out = p.raw_predict(X)
    assert np.all(out >= member.min(0) - 1e-12) and np.all(out <= member.max(0) + 1e-12)


def test_bagging_reduces_prediction_variance():
    g = rng(18)
    X = g.random((80, 3))
    y = 0.5 * X[:, 0] + g.normal(0, 0.1, 80)
    Xt = g.random((20, 3))
    spec = ModelSpec("gbrt", {"n_stages": 30, "max_depth": 3})
    singles = np.array([bagging_train(spec, X, y, 1, seed=s, whiten=False).raw_predict(Xt)
                        for s in range(50)])
    bagged = np.array([bagging_train(spec, X, y, 8, seed=s, whiten=False).raw_predict(Xt)
                       for s in range(50)])
    assert bagged.var(axis=0).mean() <= singles.var(axis=0).mean()


def test_identical_members_match_single_model():
    X, y = _informative()
    single = train(ModelSpec("ridge"), X, y)
    dup = TrainedPredictor(single.spec, single.whitener, single.selected, single.ensemble * 3)
    assert np.allclose(dup.raw_predict(X), single.raw_predict(X))


def test_predict_clamps():
    X = np.arange(10.0)[:, None]
    p = train(ModelSpec("ridge", {"lambda": 0}), X, 0.13 * X[:, 0], whiten=False)
    assert p.raw_predict([10.0]) == pytest.approx(1.3)
    assert p.predict([10.0]) == 1.0 and p.predict([-5.0]) == 0.0


def test_predict_width_mismatch():
    X, y = _informative()
    p = train(ModelSpec("ridge"), X, y)
    with pytest.raises(ValueError, match="width"):
        p.predict(np.ones(3))


@pytest.mark.parametrize("kind", ["ridge", "knn", "tree", "forest", "gbrt"])
def test_persistence_round_trip(kind):
    X, y = _informative()
    p = bagging_train(ModelSpec(kind, {"n_trees": 4} if kind == "forest" else {}), X, y, 2, 3,
                      selected=[2, 0, 4], target="success")
    text = dumps(p)
    q = loads(text)
    assert dumps(q) == text
    assert np.array_equal(q.predict(X), p.predict(X))


def test_newer_format_rejected():
    X, y = _informative()
    d = json.loads(dumps(train(ModelSpec("ridge"), X, y)))
    d["version"] = FORMAT_VERSION + 1
    with pytest.raises(ValueError, match="newer"):
        loads(json.dumps(d))


def test_pipeline_is_deterministic_and_reports():
    X, y = _informative(n=40)
    cfg = PipelineConfig(kind="knn", k_cv=4, bags=3)
    p1, r1 = fit_pipeline(X, y, 2, cfg)
    p2, r2 = fit_pipeline(X, y, 2, PipelineConfig(kind="knn", k_cv=4, bags=3))
    assert dumps(p1) == dumps(p2) and r1 == r2
    assert 2 <= r1["chosen_k"] <= X.shape[1]
    assert set(r1) >= {"cv_mean", "cv_variance", "chosen_grid_point", "ranking", "sweep"}


def test_auto_kind_selection_records_scores():
    X, y = _informative(n=40)
    _, rep = fit_pipeline(X, y, 0, PipelineConfig(k_cv=4, bags=2,
                                                  candidates=("ridge", "knn")))
    assert set(rep["model_selection"]) == {"ridge", "knn"}
    assert rep["model"]["kind"] in ("ridge", "knn")


def test_cv_result_fields():
    r = CVResult(0.5, 0.1, (0.4, 0.6))
    assert r.mean == 0.5 and r.fold_means == (0.4, 0.6)
