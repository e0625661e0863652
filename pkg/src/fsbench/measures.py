"""Subset evaluation measures: inconsistency rate, consistency, information gain, wrapper accuracy.

Every measure maps ``(sample, subset)`` to a real where higher is better.
Subsets are plain ``frozenset`` objects of column indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .synth import LabeledSample

FeatureSubset = frozenset

_CODE_LIMIT = 1 << 53


class UndefinedMeasureError(ValueError):
    """The measure has no value for the given sample (e.g. no rows)."""


def as_subset(indices: Iterable[int]) -> frozenset[int]:
    return frozenset(int(i) for i in indices)


def _mixed_radix(sample: LabeledSample, subset) -> tuple[np.ndarray, int]:
    cols = sorted(subset)
    n = len(sample)
    codes = np.zeros(n, dtype=np.int64)
    bound = 1
    for c in cols:
        d = int(sample.domains[c])
        if bound * d >= _CODE_LIMIT:
            _, codes = np.unique(codes, return_inverse=True)
            codes = codes.astype(np.int64).ravel()
            bound = int(codes.max()) + 1 if n else 1
        codes = codes * d + sample.rows[:, c]
        bound *= d
    return codes, bound


def pattern_codes(sample: LabeledSample, subset: Iterable[int]) -> np.ndarray:
    """Dense integer id per row of its projection onto ``subset``.

    Rows share an id exactly when they agree on every column in ``subset``;
    codes are mixed-radix and re-densified before they could overflow.
    """
    codes, _ = _mixed_radix(sample, subset)
    return np.unique(codes, return_inverse=True)[1].astype(np.int64).ravel()


def inconsistency_count(sample: LabeledSample, subset) -> int:
    """Rows not explained by the majority class of their projected pattern."""
    n = len(sample)
    if n == 0:
        raise UndefinedMeasureError("inconsistency of an empty sample")
    codes, bound = _mixed_radix(sample, subset)
    if bound > max(8 * n, 1 << 16):
        codes = np.unique(codes, return_inverse=True)[1].ravel()
        bound = int(codes.max()) + 1
    counts = np.bincount(codes * 2 + sample.labels, minlength=2 * bound).reshape(-1, 2)
    return int(n - counts.max(axis=1).sum())


def inconsistency_rate(sample: LabeledSample, subset) -> float:
    return inconsistency_count(sample, subset) / len(sample)


def consistency_measure(sample: LabeledSample, subset) -> float:
    """``1 / (IR + 1)``; equals 1 exactly when the projection is consistent."""
    n = len(sample)
    return n / (inconsistency_count(sample, subset) + n)


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def class_entropy(sample: LabeledSample) -> float:
    if len(sample) == 0:
        raise UndefinedMeasureError("entropy of an empty sample")
    return _entropy(np.bincount(sample.labels, minlength=2))


def info_gain(sample: LabeledSample, feature: int) -> float:
    """``H(class) - H(class | feature)`` from empirical frequencies, in bits."""
    n = len(sample)
    if n == 0:
        raise UndefinedMeasureError("information gain on an empty sample")
    d = int(sample.domains[feature])
    joint = np.bincount(sample.rows[:, feature] * 2 + sample.labels, minlength=2 * d).reshape(d, 2)
    conditional = sum(row.sum() / n * _entropy(row) for row in joint if row.sum())
    return max(0.0, _entropy(joint.sum(axis=0)) - conditional)


def wrapper_accuracy(sample: LabeledSample, subset, inducer: str = "tree", folds: int = 3,
                     seed: int = 0) -> float:
    """Stratified cross-validated accuracy of ``inducer`` on the projected sample."""
    from .inducers import cross_val_accuracy

    return cross_val_accuracy(sample, subset, inducer, folds, seed)


@dataclass(frozen=True)
class Measure:
    """An evaluation measure plus whether it is monotone under inclusion."""

    evaluate: Callable[[LabeledSample, frozenset], float]
    monotone: bool
    name: str

    def __call__(self, sample: LabeledSample, subset) -> float:
        return self.evaluate(sample, subset)


CONSISTENCY = Measure(consistency_measure, True, "consistency")


@dataclass(frozen=True)
class _Wrapper:
    inducer: str
    folds: int
    seed: int

    def __call__(self, sample, subset):
        return wrapper_accuracy(sample, subset, self.inducer, self.folds, self.seed)


def wrapper_measure(inducer: str = "tree", folds: int = 3, seed: int = 0) -> Measure:
    return Measure(_Wrapper(inducer, folds, seed), False, f"wrapper-{inducer}")
