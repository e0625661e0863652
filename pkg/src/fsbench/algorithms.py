"""Feature subset selection algorithms.

Randomized (LVF, LVI), weighting (Relief, entropy-ranked SFG) with a
cut-point rule, sequential and floating greedy searches, and exact
branch and bound (ABB) with its LVF-seeded hybrid (QBB).

Every search returns an :class:`FSAResult`; subsets are frozensets of
column indices. Randomness flows only from ``SearchBudget.seed``.
"""

from __future__ import annotations

import logging
import time
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from .measures import CONSISTENCY, Measure, info_gain, wrapper_measure
from .synth import ConfigurationError, LabeledSample

logger = logging.getLogger(__name__)

ALGORITHMS = ("lvf", "lvi", "relief", "e-sfg", "c-sbg", "w-sfg", "w-sbg", "sffg", "sfbg", "abb", "qbb")


class SearchTooLargeError(RuntimeError):
    """Exhaustive search refused because the feature count exceeds its bound."""


class NoSolutionError(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchBudget:
    max_iterations: int = 1000
    patience: int = 1
    relief_p: float = 1.0
    lvi_p: float = 0.1
    seed: int = 0
    abb_bound: int = 20
    lvi_rounds: int = 100

    def __post_init__(self):
        if self.max_iterations < 1 or self.patience < 1 or self.abb_bound < 1 or self.lvi_rounds < 1:
            raise ConfigurationError("budget counts must be positive")
        if not (0 < self.relief_p <= 1 and 0 < self.lvi_p <= 1):
            raise ConfigurationError("budget fractions must lie in (0, 1]")


@dataclass
class FSAResult:
    solutions: list[frozenset]
    evaluations: int = 0
    elapsed: float = 0.0
    value: float | None = None
    details: dict = field(default_factory=dict)

    @property
    def best(self) -> frozenset:
        return self.solutions[0]


class _Evaluator:
    """Memoizing measure wrapper that counts real evaluations."""

    def __init__(self, sample: LabeledSample, measure: Callable):
        self.sample = sample
        self.measure = measure
        self.calls = 0
        self._cache: dict[frozenset, float] = {}

    def __call__(self, subset: frozenset) -> float:
        value = self._cache.get(subset)
        if value is None:
            self.calls += 1
            value = self._cache[subset] = float(self.measure(self.sample, subset))
        return value


def _ordered(subsets: Iterable[frozenset]) -> list[frozenset]:
    return sorted(set(subsets), key=lambda s: (len(s), sorted(s)))


def _all(sample: LabeledSample) -> frozenset:
    return frozenset(range(sample.n_features))


def _random_subset(members: list[int], rng: np.random.Generator) -> frozenset:
    while True:
        keep = rng.random(len(members)) < 0.5
        if keep.any():
            return frozenset(m for m, k in zip(members, keep) if k)


# --- Las Vegas -------------------------------------------------------------

def lvf(sample: LabeledSample, measure: Callable = CONSISTENCY, budget: SearchBudget = SearchBudget(),
        rng: np.random.Generator | None = None) -> FSAResult:
    """Las Vegas filter: random subsets of the incumbent, kept while J stays at J(all)."""
    start = time.perf_counter()
    rng = np.random.default_rng(budget.seed) if rng is None else rng
    J = _Evaluator(sample, measure)
    best = _all(sample)
    j0 = J(best)
    found = [best]
    for _ in range(budget.max_iterations):
        candidate = _random_subset(sorted(best), rng)
        if J(candidate) >= j0:
            if len(candidate) < len(best):
                best = candidate
                found = [candidate]
            elif len(candidate) == len(best):
                found.append(candidate)
    solutions = list(dict.fromkeys(found))
    return FSAResult(solutions, J.calls, time.perf_counter() - start, J(solutions[0]))


def _inconsistent_rows(sample: LabeledSample, subset) -> np.ndarray:
    """Rows whose projected pattern appears with both classes."""
    from .measures import pattern_codes

    codes = pattern_codes(sample, subset)
    per_class = np.zeros((int(codes.max()) + 1, 2), dtype=np.int64)
    np.add.at(per_class, (codes, sample.labels), 1)
    mixed = (per_class > 0).all(axis=1)
    return np.flatnonzero(mixed[codes])


def lvi(sample: LabeledSample, measure: Callable = CONSISTENCY,
        budget: SearchBudget = SearchBudget()) -> FSAResult:
    """Las Vegas incremental: LVF on a growing portion of the sample."""
    start = time.perf_counter()
    n = len(sample)
    portion_rng = np.random.default_rng([budget.seed, 1])
    lvf_rng = np.random.default_rng(budget.seed)
    size0 = min(n, max(1, int(round(budget.lvi_p * n))))
    in_portion = np.zeros(n, dtype=bool)
    in_portion[portion_rng.choice(n, size=size0, replace=False)] = True
    J = _Evaluator(sample, measure)
    j0 = J(_all(sample))
    evaluations = 0
    chosen = _all(sample)
    history = []
    for _ in range(budget.lvi_rounds):
        history.append(int(in_portion.sum()))
        result = lvf(sample.subsample(np.flatnonzero(in_portion)), measure, budget, rng=lvf_rng)
        evaluations += result.evaluations
        chosen = result.best
        rest_idx = np.flatnonzero(~in_portion)
        if rest_idx.size == 0:
            break
        rest = sample.subsample(rest_idx)
        if measure(rest, chosen) >= j0:
            break
        evaluations += 1
        moved = rest_idx[_inconsistent_rows(rest, chosen)]
        in_portion[moved] = True
    else:
        logger.warning("lvi: no accepted subset after %d rounds; returning the last LVF solution",
                       budget.lvi_rounds)
    value = float(measure(sample, chosen))
    return FSAResult([chosen], evaluations + J.calls + 1, time.perf_counter() - start, value,
                     {"portion_sizes": history})


# --- weighting -------------------------------------------------------------

def _overlap(row: np.ndarray, rows: np.ndarray) -> np.ndarray:
    return (rows != row).astype(float)


def relief_weights(sample: LabeledSample, distance: Callable | None = None,
                   budget: SearchBudget = SearchBudget()) -> np.ndarray:
    """Two-class Relief; per-feature distance defaults to 0/1 overlap.

    Near hit and near miss minimize the summed per-feature distance,
    excluding the drawn instance; ties go to the lowest row index.
    """
    distance = _overlap if distance is None else distance
    labels = sample.labels
    n = len(sample)
    if n == 0 or np.unique(labels).size < 2:
        raise ValueError("relief needs both classes in the sample")
    rng = np.random.default_rng(budget.seed)
    m = max(1, int(round(budget.relief_p * n)))
    rows = sample.rows
    weights = np.zeros(sample.n_features)
    skipped = 0
    for _ in range(m):
        i = int(rng.integers(n))
        per_feature = distance(rows[i], rows)
        total = per_feature.sum(axis=1)
        total[i] = np.inf
        same = labels == labels[i]
        same[i] = False
        if not same.any():
            skipped += 1
            continue
        hits = np.flatnonzero(same)
        misses = np.flatnonzero(labels != labels[i])
        near_hit = hits[np.argmin(total[hits])]
        near_miss = misses[np.argmin(total[misses])]
        weights += (per_feature[near_miss] - per_feature[near_hit]) / m
    if skipped:
        logger.info("relief: skipped %d draws from a single-instance class", skipped)
    return weights


def cut_point(weights) -> frozenset:
    """Turn a weight vector into a subset by the normalized gap-times-fraction rule.

    Weights more than two standard deviations from the mean are set aside
    while locating the cut; high outliers are always kept, low ones dropped.
    """
    w = np.asarray(weights, dtype=float)
    n = w.size
    if n < 2:
        raise ValueError("cut_point needs at least two weights")
    if np.all(w == w[0]):
        return frozenset(range(n))
    mean, spread = w.mean(), w.std()
    high = np.flatnonzero(w > mean + 2 * spread)
    low = w < mean - 2 * spread
    kept = set(high.tolist())
    core = np.array([i for i in np.argsort(w, kind="stable") if i not in kept and not low[i]], dtype=np.int64)
    if core.size < 2 or w[core[-1]] == w[core[0]]:
        return frozenset(kept | set(core.tolist()))
    ws = w[core]
    j = np.arange(1, core.size + 1)
    ratio = (ws[-1] - ws) / (ws[-1] - ws[0]) * j / core.size
    j_star = int(np.argmax(ratio)) + 1
    return frozenset(kept | set(core[j_star:].tolist()))


def relief(sample: LabeledSample, budget: SearchBudget = SearchBudget()) -> FSAResult:
    start = time.perf_counter()
    w = relief_weights(sample, budget=budget)
    return FSAResult([cut_point(w)], 0, time.perf_counter() - start, None, {"weights": w.tolist()})


def e_sfg(sample: LabeledSample, budget: SearchBudget = SearchBudget()) -> FSAResult:
    """Rank features by individual information gain, then apply the cut-point."""
    start = time.perf_counter()
    w = np.array([info_gain(sample, f) for f in range(sample.n_features)])
    return FSAResult([cut_point(w)], sample.n_features, time.perf_counter() - start, None,
                     {"weights": w.tolist()})


def nested_subset_select(weights, sample: LabeledSample, measure: Callable = CONSISTENCY,
                         mode: int = 2, bound: float | None = None) -> frozenset:
    """Scan prefixes of the decreasing-weight order.

    ``mode=1``: best-J prefix among the first ``bound`` (size cap C_0)
    prefixes. ``mode=2``: first prefix with J >= ``bound`` (quality floor J_0;
    defaults to J of the full set).
    """
    w = np.asarray(weights, dtype=float)
    order = sorted(range(w.size), key=lambda i: (-w[i], i))
    J = _Evaluator(sample, measure)
    if mode == 1:
        cap = w.size if bound is None else int(bound)
        best, best_j = None, -np.inf
        for k in range(1, min(cap, w.size) + 1):
            prefix = frozenset(order[:k])
            value = J(prefix)
            if value > best_j:
                best, best_j = prefix, value
        if best is None:
            raise NoSolutionError("size cap admits no non-empty prefix")
        return best
    if mode != 2:
        raise ValueError("mode must be 1 or 2")
    floor = J(frozenset(order)) if bound is None else bound
    for k in range(1, w.size + 1):
        prefix = frozenset(order[:k])
        if J(prefix) >= floor:
            return prefix
    raise NoSolutionError(f"no prefix reaches J >= {floor}")


# --- sequential greedy -----------------------------------------------------

def _better(value: float, subset: frozenset, best_value: float, best: frozenset) -> bool:
    return value > best_value or (value == best_value and len(subset) < len(best))


def _argmax(J: _Evaluator, candidates: Iterable[frozenset]) -> tuple[frozenset, float]:
    best, best_j = None, -np.inf
    for c in candidates:
        v = J(c)
        if v > best_j:
            best, best_j = c, v
    return best, best_j


def _sequential(sample, measure, budget, forward: bool) -> FSAResult:
    start = time.perf_counter()
    J = _Evaluator(sample, measure)
    universe = _all(sample)
    current = frozenset() if forward else universe
    best, best_j = current, J(current)
    stall = 0
    while (current != universe) if forward else bool(current):
        if forward:
            options = (current | {x} for x in sorted(universe - current))
        else:
            options = (current - {x} for x in sorted(current))
        current, value = _argmax(J, options)
        if _better(value, current, best_j, best):
            best, best_j = current, value
            stall = 0
        else:
            stall += 1
            if stall >= budget.patience:
                break
    return FSAResult([best], J.calls, time.perf_counter() - start, best_j)


def sfg(sample: LabeledSample, measure: Callable, budget: SearchBudget = SearchBudget()) -> FSAResult:
    """Sequential forward generation from the empty set; returns the best subset seen."""
    return _sequential(sample, measure, budget, forward=True)


def sbg(sample: LabeledSample, measure: Callable, budget: SearchBudget = SearchBudget()) -> FSAResult:
    """Sequential backward generation from the full set; returns the best subset seen."""
    return _sequential(sample, measure, budget, forward=False)


# --- floating search -------------------------------------------------------

def _window(n: int, d: int | None, delta: int | None) -> tuple[int, int]:
    d = n if d is None else d
    delta = n if delta is None else delta
    if not 0 <= d <= n or delta < 0:
        raise ConfigurationError(f"infeasible size window d={d}, delta={delta} for {n} features")
    return max(0, d - delta), min(n, d + delta)


def _floating(sample, measure, d, delta, forward: bool) -> FSAResult:
    start = time.perf_counter()
    n = sample.n_features
    lo, hi = _window(n, d, delta)
    J = _Evaluator(sample, measure)
    universe = _all(sample)
    table: dict[int, tuple[float, frozenset]] = {}
    trace = []

    def record(subset: frozenset) -> None:
        v = J(subset)
        k = len(subset)
        if k not in table or v > table[k][0]:
            table[k] = (v, subset)
            trace.append((k, v))

    def grow(s):
        return (s | {x} for x in sorted(universe - s))

    def shrink(s):
        return (s - {x} for x in sorted(s))

    step, counter = (grow, shrink) if forward else (shrink, grow)
    current = frozenset() if forward else universe
    record(current)
    while (len(current) < hi) if forward else (len(current) > lo):
        current, _ = _argmax(J, step(current))
        record(current)
        # conditional steps the other way while they beat the best of their size
        while (len(current) > 1) if forward else (len(current) < n - 1):
            candidate, value = _argmax(J, counter(current))
            k = len(candidate)
            if k in table and value <= table[k][0]:
                break
            current = candidate
            record(current)

    in_window = [(v, s) for k, (v, s) in table.items() if lo <= k <= hi]
    v, best = max(in_window, key=lambda e: (e[0], -len(e[1]), [-i for i in sorted(e[1])]))
    return FSAResult([best], J.calls, time.perf_counter() - start, v,
                     {"table": {k: (v, sorted(s)) for k, (v, s) in sorted(table.items())}, "trace": trace})


def sffg(sample: LabeledSample, measure: Callable = CONSISTENCY, d: int | None = None,
         delta: int | None = None) -> FSAResult:
    """Sequential floating forward generation; ``d=None, delta=None`` is free-type."""
    return _floating(sample, measure, d, delta, forward=True)


def sfbg(sample: LabeledSample, measure: Callable = CONSISTENCY, d: int | None = None,
         delta: int | None = None) -> FSAResult:
    """Sequential floating backward generation; ``d=None, delta=None`` is free-type."""
    return _floating(sample, measure, d, delta, forward=False)


# --- branch and bound ------------------------------------------------------

def _mask(subset: Iterable[int]) -> int:
    m = 0
    for i in subset:
        m |= 1 << i
    return m


def _members(mask: int) -> frozenset:
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)


def _abb_search(J: _Evaluator, root: frozenset, j0: float) -> tuple[list[frozenset], list[frozenset]]:
    """Breadth-first removal search below ``root``; returns (passing states, pruned states)."""
    root_mask = _mask(root)
    passing = [root_mask]
    pruned: list[int] = []
    seen = {root_mask}
    queue = deque()

    def expand(mask: int) -> None:
        bits = mask
        while bits:
            low = bits & -bits
            child = mask & ~low
            if child not in seen:
                seen.add(child)
                queue.append(child)
            bits &= bits - 1

    expand(root_mask)
    while queue:
        state = queue.popleft()
        if any(state & ~p == 0 for p in pruned):
            continue
        if J(_members(state)) >= j0:
            passing.append(state)
            expand(state)
        else:
            pruned.append(state)
    return [_members(m) for m in passing], [_members(m) for m in pruned]


def abb(sample: LabeledSample, measure: Measure | Callable = CONSISTENCY, within: Iterable[int] | None = None,
        bound: int = 20, j0: float | None = None) -> FSAResult:
    """Automatic branch and bound: every minimum-size subset with J >= J(all features).

    ``within`` restricts the search to subsets of a starting set (the bound
    stays J of the full feature set unless ``j0`` is given).
    """
    start = time.perf_counter()
    root = _all(sample) if within is None else frozenset(within)
    if len(root) > bound:
        raise SearchTooLargeError(f"abb over {len(root)} features exceeds the exhaustive bound {bound}; use qbb")
    J = _Evaluator(sample, measure)
    if j0 is None:
        j0 = J(_all(sample))
    passing, pruned = _abb_search(J, root, j0)
    k = min(len(s) for s in passing)
    solutions = _ordered(s for s in passing if len(s) == k)
    return FSAResult(solutions, J.calls, time.perf_counter() - start, J(solutions[0]),
                     {"pruned": [sorted(s) for s in _ordered(pruned)]})


def qbb(sample: LabeledSample, measure: Measure | Callable = CONSISTENCY,
        budget: SearchBudget = SearchBudget()) -> FSAResult:
    """LVF for starting points (half the iteration budget), then ABB below each one."""
    start = time.perf_counter()
    lvf_budget = replace(budget, max_iterations=max(1, budget.max_iterations // 2))
    seeds = lvf(sample, measure, lvf_budget)
    j0 = float(measure(sample, _all(sample)))
    found: list[frozenset] = []
    evaluations = seeds.evaluations
    for start_set in seeds.solutions:
        part = abb(sample, measure, within=start_set, bound=budget.abb_bound, j0=j0)
        evaluations += part.evaluations
        found.extend(part.solutions)
    k = min(len(s) for s in found)
    solutions = _ordered(s for s in found if len(s) == k)
    return FSAResult(solutions, evaluations, time.perf_counter() - start, float(measure(sample, solutions[0])))


# --- registry --------------------------------------------------------------

def run_algorithm(name: str, sample: LabeledSample, budget: SearchBudget = SearchBudget(),
                  inducer: str = "tree", folds: int = 3) -> FSAResult:
    """Run one of :data:`ALGORITHMS` by name (case-insensitive)."""
    key = name.strip().lower()
    if key == "lvf":
        return lvf(sample, CONSISTENCY, budget)
    if key == "lvi":
        return lvi(sample, CONSISTENCY, budget)
    if key == "relief":
        return relief(sample, budget)
    if key == "e-sfg":
        return e_sfg(sample, budget)
    if key == "c-sbg":
        return sbg(sample, CONSISTENCY, budget)
    if key in ("w-sfg", "w-sbg"):
        measure = wrapper_measure(inducer, folds, budget.seed)
        return sfg(sample, measure, budget) if key == "w-sfg" else sbg(sample, measure, budget)
    if key == "sffg":
        return sffg(sample, CONSISTENCY)
    if key == "sfbg":
        return sfbg(sample, CONSISTENCY)
    if key == "abb":
        return abb(sample, CONSISTENCY, bound=budget.abb_bound)
    if key == "qbb":
        return qbb(sample, CONSISTENCY, budget)
    raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
