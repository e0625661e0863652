"""Experiment grids over problems, algorithms, corruption ratios and sample sizes.

A grid cell fixes (problem, N_R, N_I, N_R', k); every (cell, run) pair gets
a seed hashed from the master seed and its own coordinates, so cells are
independent of one another and of execution order. Records are sorted by
coordinates before they are written.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .algorithms import ALGORITHMS, SearchBudget, run_algorithm
from .synth import ConfigurationError, Problem, build_schema, generate_sample, sample_size
from .score import RolePartition, score

logger = logging.getLogger(__name__)

FULL_LEVELS = {
    Problem.PARITY: (4, 8, 16, 32),
    Problem.DISJUNCTION: (5, 10, 15, 20),
    Problem.GMONKS: (6, 12, 18, 24),
}
DIVISORS = {Problem.PARITY: 4, Problem.DISJUNCTION: 5, Problem.GMONKS: 6}
CORRUPTION_STEPS = tuple(range(11))
SIZE_FACTORS = (0.25, 0.5, 0.75, 1.0, 1.25, 1.75, 2.0)

RECORD_HEADER = ("problem", "n_r", "n_i", "n_rr", "k", "ratio", "algorithm", "run", "score", "size",
                 "solution", "elapsed_ms", "evaluations")


class Axis(str, enum.Enum):
    IRRELEVANCE = "irrelevance"
    REDUNDANCY = "redundancy"
    SAMPLE_SIZE = "sample_size"

    @classmethod
    def parse(cls, name) -> "Axis":
        if isinstance(name, Axis):
            return name
        key = str(name).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"samplesize": "sample_size", "size": "sample_size"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ConfigurationError(f"unknown axis {name!r}") from None


@dataclass(frozen=True)
class Cell:
    problem: Problem
    n_r: int
    n_i: int
    n_rr: int
    k: float
    ratio: float
    step: int


@dataclass(frozen=True)
class ExperimentGrid:
    problem: Problem
    axis: Axis
    algorithms: tuple[str, ...] = ALGORITHMS
    relevance_levels: tuple[int, ...] | None = None
    ratio_steps: tuple[float, ...] | None = None
    alpha: float = 20.0
    k: float = 1.0
    runs: int = 10
    epsilon: float = 1.0
    master_seed: int = 0
    full_grid: bool = False
    max_iterations: int = 1000
    patience: int = 1
    relief_p: float = 1.0
    lvi_p: float = 0.1
    inducer: str = "tree"
    folds: int = 3

    def __post_init__(self):
        object.__setattr__(self, "problem", Problem.parse(self.problem))
        object.__setattr__(self, "axis", Axis.parse(self.axis))
        algos = tuple(a.strip().lower() for a in self.algorithms)
        unknown = [a for a in algos if a not in ALGORITHMS]
        if unknown:
            raise ConfigurationError(f"unknown algorithms: {', '.join(unknown)}")
        object.__setattr__(self, "algorithms", algos)
        if self.runs < 1:
            raise ConfigurationError("runs must be >= 1")
        self.cells()  # validates integrality of the corruption grid

    @property
    def levels(self) -> tuple[int, ...]:
        if self.relevance_levels is not None:
            return tuple(self.relevance_levels)
        full = FULL_LEVELS[self.problem]
        return full if self.full_grid else full[:2]

    @property
    def steps(self) -> tuple[float, ...]:
        if self.ratio_steps is not None:
            return tuple(self.ratio_steps)
        return SIZE_FACTORS if self.axis is Axis.SAMPLE_SIZE else CORRUPTION_STEPS

    def budget(self, seed: int) -> SearchBudget:
        return SearchBudget(max_iterations=self.max_iterations, patience=self.patience,
                            relief_p=self.relief_p, lvi_p=self.lvi_p, seed=seed)

    def cells(self) -> list[Cell]:
        p = DIVISORS[self.problem]
        out = []
        for n_r in self.levels:
            for step, value in enumerate(self.steps):
                if self.axis is Axis.SAMPLE_SIZE:
                    half = n_r // 2
                    out.append(Cell(self.problem, n_r, half, half, float(value), float(value), step))
                    continue
                extra = value * n_r / p
                if extra != int(extra):
                    raise ConfigurationError(f"{value}*{n_r}/{p} is not an integer feature count")
                n_i, n_rr = (int(extra), 0) if self.axis is Axis.IRRELEVANCE else (0, int(extra))
                out.append(Cell(self.problem, n_r, n_i, n_rr, float(self.k), value / p, step))
        return out


_GRID_KEYS = {f.name for f in fields(ExperimentGrid)}


def grid_from_mapping(data: dict) -> ExperimentGrid:
    unknown = sorted(set(data) - _GRID_KEYS)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
    for key in ("problem", "axis"):
        if key not in data:
            raise ConfigurationError(f"config is missing {key!r}")
    values = dict(data)
    for key in ("algorithms", "relevance_levels", "ratio_steps"):
        if key in values and values[key] is not None:
            if isinstance(values[key], (str, int, float)):
                values[key] = [values[key]]
            values[key] = tuple(values[key])
    return ExperimentGrid(**values)


def load_grid(path) -> ExperimentGrid:
    """Read a TOML key-value grid config; unknown keys are errors."""
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        return grid_from_mapping(tomllib.load(fh))


def stable_seed(*parts) -> int:
    """64-bit seed from a hash of the parts' text form; stable across processes and platforms."""
    text = "|".join(repr(p) for p in parts)
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


@dataclass(frozen=True)
class ResultRecord:
    problem: str
    n_r: int
    n_i: int
    n_rr: int
    k: float
    ratio: float
    algorithm: str
    run: int
    score: float | None
    size: int | None
    solution: tuple[int, ...]
    elapsed_ms: float | None = field(default=None, compare=False)  # wall time is not part of identity
    evaluations: int | None = None
    error: str | None = None

    @property
    def is_diagnostic(self) -> bool:
        return self.error is not None


def _run_unit(grid: ExperimentGrid, cell: Cell, run: int) -> list[ResultRecord]:
    coords = (grid.master_seed, cell.problem.value, cell.n_r, cell.n_i, cell.n_rr, cell.k, run)
    schema = build_schema(cell.problem, cell.n_r, cell.n_i, cell.n_rr, seed=stable_seed("schema", *coords))
    size = sample_size(grid.alpha, cell.k, schema.n_total, 2)
    sample = generate_sample(schema, size, seed=stable_seed("sample", *coords))
    partition = RolePartition.from_schema(schema)
    budget = grid.budget(stable_seed("search", *coords))
    base = dict(problem=cell.problem.value, n_r=cell.n_r, n_i=cell.n_i, n_rr=cell.n_rr, k=cell.k,
                ratio=cell.ratio, run=run)
    records = []
    for name in grid.algorithms:
        start = time.perf_counter()
        try:
            result = run_algorithm(name, sample, budget, inducer=grid.inducer, folds=grid.folds)
        except Exception as exc:  # recorded, never fatal to the grid
            logger.warning("%s failed on %s run %d: %s", name, base, run, exc)
            records.append(ResultRecord(**base, algorithm=name, score=None, size=None, solution=(),
                                        error=type(exc).__name__))
            continue
        solution = tuple(sorted(result.best))
        records.append(ResultRecord(
            **base, algorithm=name, score=score(partition, result.best, grid.epsilon), size=len(solution),
            solution=solution, elapsed_ms=(time.perf_counter() - start) * 1000.0,
            evaluations=result.evaluations))
    return records


def _run_unit_packed(args):
    return _run_unit(*args)


def record_sort_key(grid: ExperimentGrid):
    order = {a: i for i, a in enumerate(grid.algorithms)}
    return lambda r: (r.problem, r.n_r, r.ratio, r.k, order.get(r.algorithm, len(order)), r.algorithm, r.run)


def run_grid(grid: ExperimentGrid, jobs: int = 1) -> list[ResultRecord]:
    units = [(grid, cell, run) for cell in grid.cells() for run in range(grid.runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_unit_packed, units))
    else:
        chunks = [_run_unit(*u) for u in units]
    records = list(itertools.chain.from_iterable(chunks))
    return sorted(records, key=record_sort_key(grid))


# --- aggregation -----------------------------------------------------------

@dataclass
class Summary:
    weighted: bool
    curve: dict[str, dict[float, float]]  # algorithm -> ratio -> mean score
    by_total: list[tuple[str, float]] = field(default_factory=list)
    by_end: list[tuple[str, float]] = field(default_factory=list)

    def rows(self) -> list[tuple[str, float, float]]:
        return [(a, r, m) for a in sorted(self.curve) for r, m in sorted(self.curve[a].items())]


def aggregate(records: Iterable[ResultRecord], weighted: bool = False) -> Summary:
    """Mean score per (algorithm, ratio): runs averaged within a relevance level, then levels combined.

    With ``weighted`` each level's mean counts proportionally to its N_R.
    """
    usable = [r for r in records if not r.is_diagnostic]
    if not usable:
        raise ValueError("no records to aggregate")
    per_level: dict[tuple[str, float, int], list[float]] = {}
    for r in usable:
        per_level.setdefault((r.algorithm, r.ratio, r.n_r), []).append(r.score)
    combined: dict[tuple[str, float], list[tuple[int, float]]] = {}
    for (algo, ratio, n_r), scores in per_level.items():
        combined.setdefault((algo, ratio), []).append((n_r, math.fsum(scores) / len(scores)))
    curve: dict[str, dict[float, float]] = {}
    for (algo, ratio), level_means in combined.items():
        level_means.sort()
        if weighted:
            value = math.fsum(n * m for n, m in level_means) / sum(n for n, _ in level_means)
        else:
            value = math.fsum(m for _, m in level_means) / len(level_means)
        curve.setdefault(algo, {})[ratio] = value
    totals = {a: math.fsum(c.values()) / len(c) for a, c in curve.items()}
    ends = {a: c[max(c)] for a, c in curve.items()}
    by_total = sorted(totals.items(), key=lambda e: (-e[1], e[0]))
    by_end = sorted(ends.items(), key=lambda e: (-e[1], e[0]))
    return Summary(weighted, curve, by_total, by_end)


# --- flat files ------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_records(records: Sequence[ResultRecord], timing: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_HEADER)
    for r in records:
        solution = "!" + r.error if r.error else "-".join(map(str, r.solution))
        writer.writerow([r.problem, r.n_r, r.n_i, r.n_rr, _fmt(r.k), _fmt(r.ratio), r.algorithm, r.run,
                         _fmt(r.score), _fmt(r.size), solution, _fmt(r.elapsed_ms) if timing else "",
                         _fmt(r.evaluations)])
    return buf.getvalue()


def emit_results(records: Sequence[ResultRecord], destination, timing: bool = True) -> Path:
    """Write records as comma-delimited text with the fixed header."""
    path = Path(destination)
    try:
        path.write_text(format_records(records, timing))
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def parse_records(text: str) -> list[ResultRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != RECORD_HEADER:
        raise ValueError("records file lacks the expected header")

    def opt(value, cast):
        return None if value == "" else cast(value)

    out = []
    for row in reader:
        (problem, n_r, n_i, n_rr, k, ratio, algorithm, run, sc, size, solution, elapsed, evals) = row
        error = solution[1:] if solution.startswith("!") else None
        indices = () if error or not solution else tuple(int(v) for v in solution.split("-"))
        out.append(ResultRecord(problem, int(n_r), int(n_i), int(n_rr), float(k), float(ratio), algorithm,
                                int(run), opt(sc, float), opt(size, int), indices, opt(elapsed, float),
                                opt(evals, int), error))
    return out


def read_results(path) -> list[ResultRecord]:
    return parse_records(Path(path).read_text())


def emit_summary(summary: Summary | None, destination) -> Path:
    path = Path(destination)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("algorithm", "ratio", "mean_score", "weighted"))
    if summary is not None:
        for algo, ratio, mean in summary.rows():
            writer.writerow((algo, _fmt(ratio), _fmt(mean), int(summary.weighted)))
    path.write_text(buf.getvalue())
    return path


def emit_rankings(summary: Summary, destination) -> Path:
    path = Path(destination)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("key", "rank", "algorithm", "mean_score"))
    for key, ranking in (("total", summary.by_total), ("end", summary.by_end)):
        for rank, (algo, value) in enumerate(ranking, 1):
            writer.writerow((key, rank, algo, _fmt(value)))
    path.write_text(buf.getvalue())
    return path


def emit_curves(records: Iterable[ResultRecord], directory) -> list[Path]:
    """One data file per (algorithm, N_R) curve: ratio against mean score over runs."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    curves: dict[tuple[str, str, int], dict[float, list[float]]] = {}
    for r in records:
        if not r.is_diagnostic:
            curves.setdefault((r.problem, r.algorithm, r.n_r), {}).setdefault(r.ratio, []).append(r.score)
    written = []
    for (problem, algo, n_r), points in sorted(curves.items()):
        path = directory / f"curve_{problem}_{algo}_nr{n_r}.csv"
        lines = ["ratio,mean_score,runs"]
        lines += [f"{ratio!r},{math.fsum(v) / len(v)!r},{len(v)}" for ratio, v in sorted(points.items())]
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


# --- inducer accuracy against score ----------------------------------------

@dataclass(frozen=True)
class VariabilityConfig:
    problem: Problem = Problem.GMONKS
    n_relevant: int = 24
    n_irrelevant: int = 24
    n_redundant: int = 12
    size: int = 600
    runs: int = 10
    algorithm: str = "w-sfg"
    inducer: str = "nb"
    folds: int = 3
    patience: int = 5
    epsilon: float = 1.0
    master_seed: int = 0
    accuracy_gap: float = 0.02
    score_gap: float = 0.1


@dataclass(frozen=True)
class VariabilityRow:
    run: int
    accuracy: float
    score: float
    n_relevant_chosen: int  # |A_R ∪ A_R'|
    n_irrelevant_chosen: int  # |A_I|
    solution: tuple[int, ...]


@dataclass
class VariabilityReport:
    config: VariabilityConfig
    rows: list[VariabilityRow]
    closest_pair: tuple[int, int]
    accuracy_gap: float
    score_gap: float

    @property
    def property_met(self) -> bool:
        """Closest-accuracy pair is within the accuracy tolerance yet differs in score beyond the score tolerance."""
        return self.accuracy_gap < self.config.accuracy_gap and self.score_gap > self.config.score_gap

    def divergent_pairs(self) -> list[tuple[int, int]]:
        """Every pair of runs within the accuracy tolerance but beyond the score tolerance."""
        return [(a.run, b.run) for a, b in itertools.combinations(self.rows, 2)
                if abs(a.accuracy - b.accuracy) < self.config.accuracy_gap
                and abs(a.score - b.score) > self.config.score_gap]

    def table(self) -> str:
        lines = ["run,accuracy,score,n_relevant_or_redundant,n_irrelevant"]
        lines += [f"{r.run + 1},{r.accuracy:.6f},{r.score:.6f},{r.n_relevant_chosen},{r.n_irrelevant_chosen}"
                  for r in self.rows]
        return "\n".join(lines) + "\n"

    def verdict(self) -> str:
        i, j = self.closest_pair
        state = "met" if self.property_met else "UNMET"
        return (f"closest-accuracy runs {i + 1} and {j + 1}: accuracy gap {self.accuracy_gap:.4f}, "
                f"score gap {self.score_gap:.4f}; divergence property {state} "
                f"({len(self.divergent_pairs())} pairs of runs diverge overall)")


def variability_experiment(config: VariabilityConfig = VariabilityConfig()) -> VariabilityReport:
    """Repeated wrapper selections on fresh samples, reporting inducer accuracy next to score."""
    rows = []
    for run in range(config.runs):
        coords = (config.master_seed, config.problem.value, config.n_relevant, config.n_irrelevant,
                  config.n_redundant, config.size, run)
        schema = build_schema(config.problem, config.n_relevant, config.n_irrelevant, config.n_redundant,
                              seed=stable_seed("schema", *coords))
        sample = generate_sample(schema, config.size, seed=stable_seed("sample", *coords))
        budget = SearchBudget(patience=config.patience, seed=stable_seed("search", *coords))
        result = run_algorithm(config.algorithm, sample, budget, inducer=config.inducer, folds=config.folds)
        partition = RolePartition.from_schema(schema)
        chosen = result.best
        rows.append(VariabilityRow(run, float(result.value), score(partition, chosen, config.epsilon),
                                   len(chosen - partition.irrelevant), len(chosen & partition.irrelevant),
                                   tuple(sorted(chosen))))
    if len(rows) < 2:
        raise ValueError("the variability experiment needs at least two runs")
    pairs = [(abs(a.accuracy - b.accuracy), -abs(a.score - b.score), a.run, b.run)
             for a, b in itertools.combinations(rows, 2)]
    acc_gap, neg_score_gap, i, j = min(pairs)
    return VariabilityReport(config, rows, (i, j), acc_gap, -neg_score_gap)
