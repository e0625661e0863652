"""Synthetic problems with known relevant, irrelevant and redundant features.

Three target functions are provided (Parity, Disjunction, GMonks). A schema
records, for every column of a generated sample, whether it drives the label,
is pure noise, or is an exact copy of a relevant column. Samples store values
as 0-based nominal codes; ``gmonks_label`` alone works on 1-based codes.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

# Original Monks attribute domains, repeated once per chunk of six features.
MONKS_DOMAINS = (3, 3, 2, 3, 4, 2)


class ConfigurationError(ValueError):
    """Raised for invalid problem/cardinality combinations."""


class Problem(str, enum.Enum):
    PARITY = "parity"
    DISJUNCTION = "disjunction"
    GMONKS = "gmonks"

    @classmethod
    def parse(cls, name: "str | Problem") -> "Problem":
        if isinstance(name, Problem):
            return name
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ConfigurationError(f"unknown problem {name!r}") from None


class Role(str, enum.Enum):
    RELEVANT = "relevant"
    IRRELEVANT = "irrelevant"
    REDUNDANT = "redundant"


@dataclass(frozen=True)
class FeatureSpec:
    index: int
    domain_size: int
    role: Role
    source: int | None = None  # column of the relevant feature this one copies

    def __post_init__(self):
        if self.domain_size < 2:
            raise ConfigurationError(f"feature {self.index}: domain_size must be >= 2")
        if (self.role is Role.REDUNDANT) != (self.source is not None):
            raise ConfigurationError(f"feature {self.index}: source is required exactly for redundant features")


@dataclass(frozen=True)
class DatasetSchema:
    """Feature roster of a synthetic problem, listed in column order.

    ``column_order[c]`` is the generation-order index of the feature placed
    at column ``c``; generation order is relevant features first (in the
    argument order of the target function), then irrelevant, then redundant.
    """

    problem: Problem
    features: tuple[FeatureSpec, ...]
    n_relevant: int
    n_irrelevant: int
    n_redundant: int
    column_order: tuple[int, ...]

    def __post_init__(self):
        n_total = self.n_relevant + self.n_irrelevant + self.n_redundant
        if len(self.features) != n_total:
            raise ConfigurationError("feature count does not match role cardinalities")
        if sorted(self.column_order) != list(range(n_total)):
            raise ConfigurationError("column_order must be a permutation")
        for pos, spec in enumerate(self.features):
            if spec.index != pos:
                raise ConfigurationError("features must be listed by column index")
            if spec.role is Role.REDUNDANT:
                if not 0 <= spec.source < n_total or self.features[spec.source].role is not Role.RELEVANT:
                    raise ConfigurationError(f"feature {pos}: source must be a relevant feature")
        counts = {r: sum(f.role is r for f in self.features) for r in Role}
        if (counts[Role.RELEVANT], counts[Role.IRRELEVANT], counts[Role.REDUNDANT]) != (
            self.n_relevant, self.n_irrelevant, self.n_redundant):
            raise ConfigurationError("feature roles do not match role cardinalities")
        _check_cardinalities(self.problem, self.n_relevant)

    @property
    def n_total(self) -> int:
        return len(self.features)

    @property
    def domain_sizes(self) -> np.ndarray:
        return np.array([f.domain_size for f in self.features], dtype=np.int64)

    @property
    def relevant_columns(self) -> tuple[int, ...]:
        """Columns of the relevant features, in target-function argument order."""
        gen_to_col = {g: c for c, g in enumerate(self.column_order)}
        return tuple(gen_to_col[g] for g in range(self.n_relevant))

    def columns_with_role(self, role: Role) -> frozenset[int]:
        return frozenset(f.index for f in self.features if f.role is role)

    def source_map(self) -> dict[int, int]:
        return {f.index: f.source for f in self.features if f.role is Role.REDUNDANT}


@dataclass(frozen=True, eq=False)
class LabeledSample:
    schema: DatasetSchema
    rows: np.ndarray  # (n, N_T) int, 0-based nominal codes
    labels: np.ndarray  # (n,) int in {0, 1}
    _domains: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.int64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != self.schema.n_total:
            raise ValueError("rows must be a (n, N_T) matrix")
        if labels.shape != (rows.shape[0],):
            raise ValueError("labels must have one entry per row")
        domains = self.schema.domain_sizes
        if rows.size and ((rows < 0) | (rows >= domains)).any():
            raise ValueError("row value outside its feature domain")
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be binary")
        rows.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_domains", domains)

    def __len__(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    @property
    def domains(self) -> np.ndarray:
        return self._domains

    def subsample(self, row_indices) -> "LabeledSample":
        idx = np.asarray(row_indices, dtype=np.int64)
        return LabeledSample(self.schema, self.rows[idx], self.labels[idx])

    def __eq__(self, other):
        if not isinstance(other, LabeledSample):
            return NotImplemented
        return (self.schema == other.schema and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.labels, other.labels))

    __hash__ = None


def _binary(values) -> np.ndarray:
    v = np.asarray(values)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a non-empty vector")
    if not np.isin(v, (0, 1)).all():
        raise ValueError(f"non-binary value in {v.tolist()}")
    return v.astype(np.int64)


def parity_label(values) -> int:
    """1 iff the number of ones is odd."""
    return int(_binary(values).sum() % 2)


def disjunction_label(values) -> int:
    v = _binary(values)
    n = v.size
    if n < 2:
        raise ValueError("disjunction needs at least two inputs")
    split = n // 2 + n % 2
    return int(bool(v[:split].all() or v[split:].all()))


def gmonks_label(values) -> int:
    """GMonks target on 1-based nominal codes, chunk domains (3,3,2,3,4,2).

    Per chunk ``x[0..5]``: P1 = x0 == x1 or x4 == 1; P2 = at least two ones;
    P3 = (x4 == 3 and x3 == 1) or (x4 != 3 and x1 != 2). A chunk is satisfied
    when P2 and not (P1 and P3); the label is 1 when at least
    ``max(1, n_chunks // 2)`` chunks are satisfied.
    """
    v = np.asarray(values, dtype=np.int64)
    if v.ndim != 1 or v.size == 0 or v.size % 6:
        raise ValueError(f"GMonks needs a multiple of 6 values, got {v.size}")
    chunks = v.reshape(-1, 6)
    limits = np.array(MONKS_DOMAINS)
    if ((chunks < 1) | (chunks > limits)).any():
        raise ValueError(f"value outside GMonks chunk domains in {v.tolist()}")
    return int(_gmonks_chunks_satisfied(chunks[None, :, :])[0] >= _gmonks_threshold(chunks.shape[0]))


def _gmonks_threshold(n_chunks: int) -> int:
    return max(1, n_chunks // 2)


def _gmonks_chunks_satisfied(chunks: np.ndarray) -> np.ndarray:
    """Count satisfied chunks per row; ``chunks`` has shape (n, n_chunks, 6), 1-based."""
    x = chunks
    p1 = (x[..., 0] == x[..., 1]) | (x[..., 4] == 1)
    p2 = (x == 1).sum(axis=-1) >= 2
    p3 = ((x[..., 4] == 3) & (x[..., 3] == 1)) | ((x[..., 4] != 3) & (x[..., 1] != 2))
    return (p2 & ~(p1 & p3)).sum(axis=-1)


def label_rows(problem: Problem, relevant: np.ndarray) -> np.ndarray:
    """Vectorized target function over 0-based relevant columns (argument order)."""
    problem = Problem.parse(problem)
    relevant = np.asarray(relevant, dtype=np.int64)
    n = relevant.shape[1]
    if problem is Problem.PARITY:
        return relevant.sum(axis=1) % 2
    if problem is Problem.DISJUNCTION:
        split = n // 2 + n % 2
        return (relevant[:, :split].all(axis=1) | relevant[:, split:].all(axis=1)).astype(np.int64)
    chunks = relevant.reshape(relevant.shape[0], n // 6, 6) + 1
    return (_gmonks_chunks_satisfied(chunks) >= _gmonks_threshold(n // 6)).astype(np.int64)


def _check_cardinalities(problem: Problem, n_relevant: int) -> None:
    if problem is Problem.GMONKS:
        if n_relevant < 6 or n_relevant % 6:
            raise ConfigurationError(f"GMonks needs N_R to be a positive multiple of 6, got {n_relevant}")
    elif problem is Problem.DISJUNCTION:
        if n_relevant < 2:
            raise ConfigurationError(f"Disjunction needs N_R >= 2, got {n_relevant}")
    elif n_relevant < 1:
        raise ConfigurationError(f"{problem.value} needs N_R >= 1, got {n_relevant}")


def build_schema(problem, n_relevant: int, n_irrelevant: int = 0, n_redundant: int = 0,
                 seed: int = 0) -> DatasetSchema:
    problem = Problem.parse(problem)
    if n_irrelevant < 0 or n_redundant < 0:
        raise ConfigurationError("role cardinalities must be non-negative")
    _check_cardinalities(problem, n_relevant)
    rng = np.random.default_rng(seed)

    if problem is Problem.GMONKS:
        relevant_domains = [MONKS_DOMAINS[i % 6] for i in range(n_relevant)]
        irrelevant_domains = [MONKS_DOMAINS[i % 6] for i in range(n_irrelevant)]
    else:
        relevant_domains = [2] * n_relevant
        irrelevant_domains = [2] * n_irrelevant
    sources = rng.integers(0, n_relevant, size=n_redundant).tolist()

    # generation order: (domain, role, generation-index of source)
    generated = [(d, Role.RELEVANT, None) for d in relevant_domains]
    generated += [(d, Role.IRRELEVANT, None) for d in irrelevant_domains]
    generated += [(relevant_domains[s], Role.REDUNDANT, s) for s in sources]

    n_total = len(generated)
    column_order = tuple(int(g) for g in rng.permutation(n_total))
    gen_to_col = {g: c for c, g in enumerate(column_order)}
    features = []
    for col, g in enumerate(column_order):
        domain, role, src = generated[g]
        features.append(FeatureSpec(col, domain, role, None if src is None else gen_to_col[src]))
    return DatasetSchema(problem, tuple(features), n_relevant, n_irrelevant, n_redundant, column_order)


def sample_size(alpha: float, k: float, n_total: int, n_classes: int = 2) -> int:
    """Linear sample-size rule ``alpha * k * N_T * c``, rounded, at least 1."""
    if alpha <= 0 or k <= 0 or n_total < 1 or n_classes < 2:
        raise ValueError("sample_size needs alpha > 0, k > 0, N_T >= 1, c >= 2")
    return max(1, int(round(alpha * k * n_total * n_classes)))


def _assemble(schema: DatasetSchema, independent: np.ndarray) -> LabeledSample:
    """Build a sample from values of relevant+irrelevant features in generation order."""
    n_rows = independent.shape[0]
    rows = np.empty((n_rows, schema.n_total), dtype=np.int64)
    base = schema.n_relevant + schema.n_irrelevant
    gen_to_col = {g: c for c, g in enumerate(schema.column_order)}
    for g in range(base):
        rows[:, gen_to_col[g]] = independent[:, g]
    for spec in schema.features:
        if spec.role is Role.REDUNDANT:
            rows[:, spec.index] = rows[:, spec.source]
    labels = label_rows(schema.problem, rows[:, list(schema.relevant_columns)])
    return LabeledSample(schema, rows, labels)


def _independent_domains(schema: DatasetSchema) -> list[int]:
    """Domain sizes of relevant+irrelevant features in generation order."""
    by_gen = {g: schema.features[c].domain_size for c, g in enumerate(schema.column_order)}
    return [by_gen[g] for g in range(schema.n_relevant + schema.n_irrelevant)]


def generate_sample(schema: DatasetSchema, size: int, seed: int = 0) -> LabeledSample:
    """Uniform independent draws for every non-redundant feature."""
    if size < 1:
        raise ValueError("sample size must be >= 1")
    rng = np.random.default_rng(seed)
    domains = _independent_domains(schema)
    independent = np.empty((size, len(domains)), dtype=np.int64)
    for g, d in enumerate(domains):
        independent[:, g] = rng.integers(0, d, size=size)
    return _assemble(schema, independent)


def exhaustive_sample(schema: DatasetSchema, repeats: int = 1) -> LabeledSample:
    """Every combination of non-redundant feature values, ``repeats`` times over."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    domains = _independent_domains(schema)
    if int(np.prod(domains, dtype=float)) > 2_000_000:
        raise ConfigurationError("truth table too large for exhaustive mode")
    table = np.array(list(itertools.product(*[range(d) for d in domains])), dtype=np.int64)
    table = table.reshape(-1, len(domains))
    return _assemble(schema, np.tile(table, (repeats, 1)))


# --- plain-text dataset files ---------------------------------------------

def format_dataset(sample: LabeledSample) -> str:
    schema = sample.schema
    lines = [f"#problem {schema.problem.value}",
             "#column_order " + ",".join(map(str, schema.column_order))]
    for f in schema.features:
        tail = f" {f.source}" if f.role is Role.REDUNDANT else ""
        lines.append(f"#feature {f.index} {f.domain_size} {f.role.value}{tail}")
    for row, label in zip(sample.rows.tolist(), sample.labels.tolist()):
        lines.append(",".join(map(str, row + [label])))
    return "\n".join(lines) + "\n"


def write_dataset(sample: LabeledSample, path) -> None:
    Path(path).write_text(format_dataset(sample))


def read_dataset(path) -> LabeledSample:
    problem = None
    column_order = None
    features: list[FeatureSpec] = []
    data: list[list[int]] = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            key = parts[0]
            if key == "problem":
                problem = Problem.parse(parts[1])
            elif key == "column_order":
                column_order = tuple(int(v) for v in parts[1].split(","))
            elif key == "feature":
                role = Role(parts[3])
                source = int(parts[4]) if role is Role.REDUNDANT else None
                features.append(FeatureSpec(int(parts[1]), int(parts[2]), role, source))
            else:
                raise ValueError(f"{path}:{lineno}: unknown header {key!r}")
            continue
        data.append([int(v) for v in line.split(",")])
    if problem is None:
        raise ValueError(f"{path}: missing #problem header")
    features.sort(key=lambda f: f.index)
    counts = {r: sum(f.role is r for f in features) for r in Role}
    if column_order is None:
        column_order = _default_column_order(features)
    schema = DatasetSchema(problem, tuple(features), counts[Role.RELEVANT], counts[Role.IRRELEVANT],
                           counts[Role.REDUNDANT], column_order)
    arr = np.array(data, dtype=np.int64).reshape(-1, schema.n_total + 1)
    return LabeledSample(schema, arr[:, :-1], arr[:, -1])


def _default_column_order(features: Sequence[FeatureSpec]) -> tuple[int, ...]:
    """Generation order implied by column position when no order header is present."""
    by_role = {r: [f.index for f in features if f.role is r] for r in Role}
    gen = by_role[Role.RELEVANT] + by_role[Role.IRRELEVANT] + by_role[Role.REDUNDANT]
    order = [0] * len(features)
    for g, col in enumerate(gen):
        order[col] = g
    return tuple(order)
