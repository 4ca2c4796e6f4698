import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from harbench import kernels
from harbench.learners import (
    SchemaMismatch,
    mlp_hidden_size,
    model_from_json,
    model_to_json,
    predict,
    predict_proba,
    soft_vote,
    train_bagging,
    train_logreg,
    train_mlp,
    train_tree,
    train_voting,
    tree_depth,
)
from harbench.neuralnet import Dense, NetSpec, Softmax, TrainConfig, grad_check
from harbench.neuralnet import Activation


def gini_oracle(X, y, n_classes, min_leaf):
    """Every (feature, midpoint) candidate scored with exact fractions."""
    n, d = X.shape
    scored = []
    for j in range(d):
        vals = sorted(set(X[:, j].tolist()))
        for a, b in zip(vals, vals[1:]):
            t = 0.5 * (a + b)
            left = [c for x, c in zip(X[:, j], y) if x <= t]
            right = [c for x, c in zip(X[:, j], y) if x > t]
            if len(left) < min_leaf or len(right) < min_leaf:
                continue
            g = Fraction(0)
            for side in (left, right):
                imp = 1 - sum(Fraction(side.count(c), len(side)) ** 2 for c in range(n_classes))
                g += Fraction(len(side), n) * imp
            scored.append((g, j, t))
    return scored


@settings(max_examples=150, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(2, 9), st.integers(1, 3)), elements=st.integers(0, 4).map(float)),
    st.data(),
    st.integers(1, 3),
)
def test_best_split_matches_exhaustive_oracle(X, data, min_leaf):
    y = np.array(data.draw(st.lists(st.integers(0, 2), min_size=X.shape[0], max_size=X.shape[0])))
    scored = gini_oracle(X, y, 3, min_leaf)
    f, t, g = kernels.best_split(X, y, 3, min_leaf)
    if not scored:
        assert f == -1
        return
    best = min(s[0] for s in scored)
    assert g == pytest.approx(float(best), abs=1e-12)
    winners = sorted((j, thr) for s, j, thr in scored if s == best)
    if len(winners) == 1:
        assert (f, t) == winners[0]


def test_separable_1d_is_a_stump():
    X = np.array([[0.0], [1.0], [2.0], [10.0], [11.0], [12.0]])
    y = ["lo"] * 3 + ["hi"] * 3
    m = train_tree(X, y)
    assert tree_depth(m) == 1
    assert predict(m, X)[0] == y


def test_pure_data_is_one_leaf():
    m = train_tree(np.random.default_rng(0).normal(size=(10, 2)), ["a"] * 10)
    assert tree_depth(m) == 0
    assert predict(m, np.zeros((3, 2)))[0] == ["a"] * 3


def test_xor_depth_two():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = [0, 1, 1, 0]
    m = train_tree(X, y)
    assert tree_depth(m) == 2
    assert predict(m, X)[0] == y


def test_max_depth_and_min_leaf():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(200, 3))
    y = rng.integers(0, 3, 200).tolist()
    assert tree_depth(train_tree(X, y, max_depth=3)) <= 3
    m = train_tree(X, y, min_leaf=20)
    leaves = np.bincount(_leaf_ids(m, X))
    assert leaves[leaves > 0].min() >= 20


def _leaf_ids(m, X):
    from harbench.learners import _tree_leaves

    return _tree_leaves(m.parameters, X)


def test_logreg_blobs():
    rng = np.random.default_rng(2)
    X = np.vstack([rng.normal(-5, 0.5, (100, 2)), rng.normal(5, 0.5, (100, 2))])
    y = [0] * 100 + [1] * 100
    m = train_logreg(X, y)
    assert np.mean(np.array(predict(m, X)[0]) == y) >= 0.99


def test_single_class_logreg():
    m = train_logreg(np.random.default_rng(0).normal(size=(20, 2)), ["only"] * 20)
    assert predict(m, np.zeros((5, 2)))[0] == ["only"] * 5


def _dense_spec(d, hidden, c):
    layers = [Dense(c), Softmax()] if hidden is None else [Dense(hidden), Activation("tanh"), Dense(c), Softmax()]
    return NetSpec((d,), tuple(layers), "fd")


@pytest.mark.parametrize("hidden", [None, 6])
def test_learner_gradients_match_finite_differences(hidden):
    rng = np.random.default_rng(3)
    x = rng.normal(size=(8, 4))
    y = rng.integers(0, 3, 8)
    assert grad_check(_dense_spec(4, hidden, 3), x, y, seed=4) < 1e-6


def test_mlp_xor():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = [0, 1, 1, 0]
    m = train_mlp(X, y, opt_cfg=TrainConfig(seed=0))
    assert predict(m, X)[0] == y
    assert len(m.parameters["net"].log) <= 200
    assert mlp_hidden_size(3) == 16 and mlp_hidden_size(20) == 40


def test_mlp_zero_epochs_is_initialization():
    X = np.random.default_rng(0).normal(size=(12, 3))
    y = ["a", "b", "c"] * 4
    m = train_mlp(X, y, opt_cfg=TrainConfig(max_epochs=0))
    assert m.parameters["net"].log == []
    labels, prob = predict(m, X)
    assert set(labels) <= {"a", "b", "c"}
    np.testing.assert_allclose(prob.sum(axis=1), 1.0)


def test_bagging_single_tree_is_bootstrap_tree():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(60, 3))
    y = rng.integers(0, 2, 60).tolist()
    bag = train_bagging(X, y, n_trees=1, seed=11)
    idx = bag.parameters["bootstrap"][0]
    np.testing.assert_array_equal(idx, np.random.default_rng(11).integers(0, 60, 60))
    tree = train_tree(X[idx], [y[i] for i in idx], class_list=bag.class_list)
    assert predict(bag, X)[0] == predict(tree, X)[0]


def test_unanimous_bagging():
    X = np.array([[0.0], [1.0], [10.0], [11.0]] * 5)
    y = ["a", "a", "b", "b"] * 5
    bag = train_bagging(X, y, n_trees=10, seed=0)
    prob = predict_proba(bag, np.array([[0.5], [10.5]]))
    np.testing.assert_array_equal(prob, [[1.0, 0.0], [0.0, 1.0]])


def test_bagging_beats_single_tree_on_noisy_data():
    wins = 0
    gaps = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(300, 2))
        y = ((X[:, 0] + X[:, 1] + rng.normal(0, 0.8, 300)) > 0).astype(int).tolist()
        Xtr, ytr, Xte, yte = X[:200], y[:200], X[200:], np.array(y[200:])
        tree_acc = np.mean(np.array(predict(train_tree(Xtr, ytr), Xte)[0]) == yte)
        bag_acc = np.mean(np.array(predict(train_bagging(Xtr, ytr, 10, seed), Xte)[0]) == yte)
        wins += bag_acc >= tree_acc
        gaps.append(bag_acc - tree_acc)
    assert wins >= 14
    assert np.mean(gaps) > 0


def test_soft_vote_hand_example():
    idx, avg = soft_vote([[0.6, 0.4], [0.2, 0.8], [0.5, 0.5]])
    np.testing.assert_allclose(avg, [1.3 / 3, 1.7 / 3])
    assert idx == 1


def test_voting_members_agree():
    X = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]] * 5)
    y = ["a", "a", "b", "b"] * 5
    v = train_voting(X, y)
    labels, _ = predict(v, X)
    for m in v.parameters["members"]:
        assert predict(m, X)[0] == labels


def test_identical_members_equal_single():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(40, 2))
    y = rng.integers(0, 3, 40).tolist()
    v = train_voting(X, y, members=("tree", "tree"))
    single = train_tree(X, y)
    np.testing.assert_allclose(predict_proba(v, X), predict_proba(single, X))


def test_schema_mismatch():
    m = train_tree(np.zeros((4, 2)) + np.arange(4)[:, None], [0, 0, 1, 1], schema=("a", "b"))
    with pytest.raises(SchemaMismatch):
        predict(m, np.zeros((1, 3)))
    with pytest.raises(SchemaMismatch):
        predict(m, np.zeros((1, 2)), schema=("b", "a"))


@pytest.mark.parametrize("kind", ["tree", "logreg", "mlp", "bagging", "voting"])
def test_json_round_trip(kind):
    rng = np.random.default_rng(6)
    X = rng.normal(size=(30, 3))
    y = rng.integers(0, 2, 30).tolist()
    cfg = TrainConfig(max_epochs=5)
    m = {
        "tree": lambda: train_tree(X, y),
        "logreg": lambda: train_logreg(X, y, cfg),
        "mlp": lambda: train_mlp(X, y, opt_cfg=cfg),
        "bagging": lambda: train_bagging(X, y, 3),
        "voting": lambda: train_voting(X, y, opt_cfg=cfg),
    }[kind]()
    back = model_from_json(model_to_json(m))
    np.testing.assert_array_equal(predict_proba(back, X), predict_proba(m, X))
    assert back.class_list == m.class_list and back.train_schema == m.train_schema
