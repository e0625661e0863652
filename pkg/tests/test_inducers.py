import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_sample
from fsbench.inducers import (
    Leaf,
    NaiveBayesModel,
    Split,
    cross_val_accuracy,
    dt_predict,
    dt_predict_many,
    dt_train,
    nb_predict,
    nb_predict_many,
    nb_train,
    stratified_folds,
)
from fsbench.measures import UndefinedMeasureError, inconsistency_rate


def _label_copy(n=8):
    labels = np.array([0, 1] * (n // 2))
    return make_sample(labels, labels)


def test_nb_smoothed_conditionals():
    model = nb_train(_label_copy(), {0})
    table = model.conditionals[0]
    assert table[1, 1] == pytest.approx(5 / 6)
    assert table[0, 0] == pytest.approx(5 / 6)
    assert np.allclose(table.sum(axis=0), 1.0)
    assert ((table > 0) & (table < 1)).all()
    assert nb_predict(model, [1]) == 1
    assert nb_predict(model, [0]) == 0


def test_nb_empty_subset_is_priors_only():
    s = make_sample(np.zeros((10, 1)), [0] * 9 + [1])
    model = nb_train(s, set())
    assert model.conditionals == ()
    assert nb_predict(model, [0]) == 0


def test_nb_prior_argmax_and_tie():
    prior_model = NaiveBayesModel((), np.array([0.9, 0.1]), ())
    assert nb_predict(prior_model, [0]) == 0
    tie = NaiveBayesModel((), np.array([0.5, 0.5]), ())
    assert nb_predict(tie, [0]) == 0
    # balanced sample with an uninformative feature ties too
    s = make_sample([[0], [0], [1], [1]], [0, 1, 0, 1])
    assert nb_predict_many(nb_train(s, {0}), np.array([[0], [1]])).tolist() == [0, 0]


def test_nb_empty_sample_errors():
    s = make_sample(np.zeros((0, 1)), [], domains=[2])
    with pytest.raises(UndefinedMeasureError):
        nb_train(s, {0})
    with pytest.raises(UndefinedMeasureError):
        dt_train(s, {0})


def test_tree_label_copy_depth_one():
    s = _label_copy()
    model = dt_train(s, {0})
    assert model.depth() == 1
    assert isinstance(model.root, Split) and model.root.feature == 0
    assert (dt_predict_many(model, s.rows) == s.labels).all()
    assert dt_predict(model, [0]) == 0


def test_tree_degenerate_cases():
    s = make_sample(np.zeros((6, 2)), [0, 1, 1, 0, 1, 1], domains=[2, 2])
    assert dt_train(s, {0, 1}).root == Leaf(1)
    assert dt_train(s, set()).root == Leaf(1)
    assert dt_predict(dt_train(s, set()), [1, 1]) == 1


def test_tree_unseen_value_falls_back_to_majority():
    s = make_sample([[0], [0], [1], [0]], [0, 0, 1, 0], domains=[3])
    model = dt_train(s, {0})
    assert dt_predict(model, [2]) == model.root.majority == 0


def test_tree_paths_use_each_feature_once():
    rng = np.random.default_rng(1)
    rows = rng.integers(0, 3, (120, 5))
    s = make_sample(rows, rng.integers(0, 2, 120), [3] * 5)
    model = dt_train(s, range(5))

    def walk(node, seen):
        if isinstance(node, Leaf):
            assert node.label in (0, 1)
            return
        assert node.feature not in seen
        for child in node.children.values():
            walk(child, seen | {node.feature})

    walk(model.root, frozenset())


def test_tree_fits_parity_truth_table():
    table = np.array(list(itertools.product((0, 1), repeat=4)))
    s = make_sample(table, table.sum(axis=1) % 2)
    model = dt_train(s, range(4))
    assert (dt_predict_many(model, s.rows) == s.labels).all()


@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
@settings(max_examples=50, deadline=None)
def test_tree_training_accuracy_on_consistent_projection(seed, width):
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, 3, (40, width))
    key = rows @ (3 ** np.arange(width))
    lookup = rng.integers(0, 2, 3 ** width)
    s = make_sample(rows, lookup[key], [3] * width)
    assert inconsistency_rate(s, range(width)) == 0
    model = dt_train(s, range(width), max_depth=width + 1)
    assert (dt_predict_many(model, s.rows) == s.labels).all()
    # prediction is pure
    assert (dt_predict_many(model, s.rows) == dt_predict_many(model, s.rows)).all()


def test_cross_validation_examples():
    rng = np.random.default_rng(4)
    labels = rng.integers(0, 2, 30)
    perfect = make_sample(np.column_stack([labels, rng.integers(0, 2, 30)]), labels)
    for folds in (2, 3, 5):
        assert cross_val_accuracy(perfect, {0}, "tree", folds) == 1.0
    skewed = make_sample(np.zeros((100, 1)), [0] * 60 + [1] * 40)
    assert cross_val_accuracy(skewed, set()) == pytest.approx(0.6, abs=0.01)
    tiny = make_sample([[0], [1], [0], [1]], [0, 0, 1, 1])
    acc = cross_val_accuracy(tiny, {0}, "nb", folds=2)
    assert 0 <= acc <= 1


def test_cross_validation_errors():
    s = _label_copy()
    with pytest.raises(ValueError):
        cross_val_accuracy(s, {0}, folds=1)
    with pytest.raises(ValueError):
        cross_val_accuracy(s, {0}, inducer_kind="svm")
    one_class = make_sample([[0], [1], [0]], [1, 1, 1])
    # a single class is present in every training part, so no fold can be scored
    with pytest.raises(UndefinedMeasureError):
        cross_val_accuracy(one_class, {0})


def test_folds_are_stratified_and_seeded():
    s = make_sample(np.arange(30) % 2, [0] * 18 + [1] * 12)
    a = stratified_folds(s, 3, 5)
    assert (a == stratified_folds(s, 3, 5)).all()
    for k in range(3):
        assert (s.labels[a == k] == 0).sum() == 6
        assert (s.labels[a == k] == 1).sum() == 4


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_cross_validation_range_and_determinism(seed):
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, 2, (25, 3))
    labels = rng.integers(0, 2, 25)
    if labels.min() == labels.max():
        labels[0] = 1 - labels[0]
    s = make_sample(rows, labels, [2] * 3)
    for inducer in ("tree", "nb"):
        a = cross_val_accuracy(s, {0, 2}, inducer, 3, seed)
        assert 0 <= a <= 1
        assert a == cross_val_accuracy(s, {0, 2}, inducer, 3, seed)
