import itertools

import numpy as np
import pytest

from fsbench.synth import DatasetSchema, FeatureSpec, LabeledSample, Problem, Role


def make_sample(rows, labels, domains=None) -> LabeledSample:
    """Wrap raw arrays in a sample; column 0 is nominally relevant, the rest irrelevant."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.ndim == 1:
        rows = rows.reshape(-1, 1)
    n = rows.shape[1]
    if domains is None:
        domains = [max(2, int(rows[:, c].max()) + 1 if len(rows) else 2) for c in range(n)]
    features = tuple(FeatureSpec(c, int(domains[c]), Role.RELEVANT if c == 0 else Role.IRRELEVANT)
                     for c in range(n))
    schema = DatasetSchema(Problem.PARITY, features, 1, n - 1, 0, tuple(range(n)))
    return LabeledSample(schema, rows, np.asarray(labels, dtype=np.int64))


def brute_force_minimum(sample, measure, j0=None):
    """Every minimum-cardinality subset whose measure reaches the full-set value."""
    n = sample.n_features
    if j0 is None:
        j0 = measure(sample, frozenset(range(n)))
    for size in range(n + 1):
        hits = [frozenset(c) for c in itertools.combinations(range(n), size)
                if measure(sample, frozenset(c)) >= j0]
        if hits:
            return set(hits)
    return set()


@pytest.fixture
def parity2_plus_noise():
    """Parity over columns 0 and 1, column 2 irrelevant, truth table twice."""
    table = np.array(list(itertools.product((0, 1), repeat=3)) * 2)
    return make_sample(table, table[:, 0] ^ table[:, 1])


# one line per acceptance criterion, printed after the run whatever the capture mode
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
