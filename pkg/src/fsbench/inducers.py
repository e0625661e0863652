"""Nominal-feature Naive Bayes and information-gain decision tree, plus stratified CV.

These stand in for the classifiers used as black-box accuracy oracles by the
wrapper algorithms. All ties resolve to class 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from .measures import UndefinedMeasureError
from .synth import LabeledSample

logger = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 12


@dataclass(frozen=True)
class NaiveBayesModel:
    features: tuple[int, ...]
    class_priors: np.ndarray  # (2,)
    conditionals: tuple[np.ndarray, ...]  # per feature: (domain, 2), columns sum to 1

    def log_posteriors(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(rows)
        scores = np.tile(np.log(self.class_priors), (rows.shape[0], 1))
        for f, table in zip(self.features, self.conditionals):
            values = rows[:, f]
            safe = np.clip(values, 0, table.shape[0] - 1)
            logp = np.log(table[safe])
            # values never seen in any domain fall back to the smoothed floor
            unseen = (values < 0) | (values >= table.shape[0])
            if unseen.any():
                logp[unseen] = np.log(table.min(axis=0))
            scores += logp
        return scores


def nb_train(sample: LabeledSample, subset) -> NaiveBayesModel:
    """Add-one smoothed estimates over the projected columns."""
    n = len(sample)
    if n == 0:
        raise UndefinedMeasureError("cannot train on an empty sample")
    class_counts = np.bincount(sample.labels, minlength=2).astype(float)
    priors = (class_counts + 1.0) / (n + 2.0)
    features = tuple(sorted(subset))
    tables = []
    for f in features:
        d = int(sample.domains[f])
        joint = np.bincount(sample.rows[:, f] * 2 + sample.labels, minlength=2 * d).reshape(d, 2)
        tables.append((joint + 1.0) / (class_counts + d))
    return NaiveBayesModel(features, priors, tuple(tables))


def nb_predict_many(model: NaiveBayesModel, rows: np.ndarray) -> np.ndarray:
    scores = model.log_posteriors(rows)
    return (scores[:, 1] > scores[:, 0]).astype(np.int64)


def nb_predict(model: NaiveBayesModel, row) -> int:
    return int(nb_predict_many(model, np.asarray(row)[None, :])[0])


@dataclass(frozen=True)
class Leaf:
    label: int


@dataclass(frozen=True)
class Split:
    feature: int
    children: dict  # value -> node
    majority: int


Node = Union[Leaf, Split]


@dataclass(frozen=True)
class DecisionTreeModel:
    root: Node
    max_depth: int

    def depth(self) -> int:
        def walk(node):
            if isinstance(node, Leaf):
                return 0
            return 1 + max((walk(c) for c in node.children.values()), default=0)
        return walk(self.root)


def _majority(labels: np.ndarray) -> int:
    ones = int(labels.sum())
    return int(ones > labels.size - ones)


def _entropy_of(labels: np.ndarray) -> float:
    n = labels.size
    if n == 0:
        return 0.0
    p1 = labels.sum() / n
    if p1 in (0.0, 1.0):
        return 0.0
    return float(-(p1 * np.log2(p1) + (1 - p1) * np.log2(1 - p1)))


def _split_gain(values: np.ndarray, labels: np.ndarray, domain: int, base: float) -> float:
    n = labels.size
    joint = np.bincount(values * 2 + labels, minlength=2 * domain).reshape(domain, 2)
    totals = joint.sum(axis=1)
    mask = totals > 0
    p = joint[mask] / totals[mask, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.nansum(np.where(p > 0, p * np.log2(p), 0.0), axis=1)
    return base - float((totals[mask] / n * h).sum())


def dt_train(sample: LabeledSample, subset, max_depth: int = DEFAULT_MAX_DEPTH) -> DecisionTreeModel:
    """Greedy unpruned tree; splits on the highest-gain unused feature (lowest index on ties).

    When every gain is zero the node still splits on the first unused feature
    that takes more than one value, so consistent projections are fitted exactly.
    """
    if len(sample) == 0:
        raise UndefinedMeasureError("cannot train on an empty sample")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    rows, labels, domains = sample.rows, sample.labels, sample.domains

    def grow(idx: np.ndarray, available: tuple[int, ...], depth: int) -> Node:
        y = labels[idx]
        majority = _majority(y)
        if depth >= max_depth or not available or y.min() == y.max():
            return Leaf(majority)
        base = _entropy_of(y)
        best_f, best_gain = None, 0.0
        for f in available:
            gain = _split_gain(rows[idx, f], y, int(domains[f]), base)
            if gain > best_gain + 1e-12:
                best_f, best_gain = f, gain
        if best_f is None:
            # no marginal gain (XOR-like targets): split on the first column that still partitions
            best_f = next((f for f in available if np.unique(rows[idx, f]).size > 1), None)
            if best_f is None:
                return Leaf(majority)
        rest = tuple(f for f in available if f != best_f)
        column = rows[idx, best_f]
        children = {int(v): grow(idx[column == v], rest, depth + 1) for v in np.unique(column)}
        return Split(best_f, children, majority)

    root = grow(np.arange(len(sample)), tuple(sorted(subset)), 0)
    return DecisionTreeModel(root, max_depth)


def dt_predict(model: DecisionTreeModel, row) -> int:
    node = model.root
    while isinstance(node, Split):
        child = node.children.get(int(row[node.feature]))
        if child is None:
            return node.majority
        node = child
    return node.label


def dt_predict_many(model: DecisionTreeModel, rows: np.ndarray) -> np.ndarray:
    return np.array([dt_predict(model, r) for r in rows], dtype=np.int64)


INDUCERS = {
    "tree": (dt_train, dt_predict_many),
    "nb": (nb_train, nb_predict_many),
}


def stratified_folds(sample: LabeledSample, folds: int, seed: int) -> np.ndarray:
    """Fold id per row, stratified by class.

    Rows are first ordered by their full (values, label) key so that the
    assignment depends on the multiset of rows, not on their storage order.
    """
    keys = np.column_stack([sample.rows, sample.labels])
    order = np.lexsort(keys.T[::-1]) if len(sample) else np.arange(0)
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(sample), dtype=np.int64)
    for c in (0, 1):
        members = order[sample.labels[order] == c]
        assignment[members[rng.permutation(members.size)]] = np.arange(members.size) % folds
    return assignment


def cross_val_accuracy(sample: LabeledSample, subset, inducer_kind: str = "tree", folds: int = 3,
                       seed: int = 0, max_depth: int = DEFAULT_MAX_DEPTH) -> float:
    if folds < 2:
        raise ValueError("folds must be >= 2")
    try:
        train, predict = INDUCERS[inducer_kind]
    except KeyError:
        raise ValueError(f"unknown inducer {inducer_kind!r}") from None
    assignment = stratified_folds(sample, folds, seed)
    accuracies = []
    for k in range(folds):
        test = assignment == k
        if not test.any():
            continue
        training = sample.subsample(np.flatnonzero(~test))
        if np.unique(training.labels).size < 2:
            logger.debug("fold %d skipped: a class is absent from its training part", k)
            continue
        model = train(training, subset, max_depth) if inducer_kind == "tree" else train(training, subset)
        predicted = predict(model, sample.rows[test])
        accuracies.append(float((predicted == sample.labels[test]).mean()))
    if not accuracies:
        raise UndefinedMeasureError("every fold lacked a class in training")
    return float(np.mean(accuracies))
