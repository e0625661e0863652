"""Command line entry point: generate, select, grid, report, variability."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .algorithms import ALGORITHMS, SearchBudget, run_algorithm
from .score import RolePartition, score
from .synth import (build_schema, exhaustive_sample, format_dataset, generate_sample, read_dataset, sample_size,
                    write_dataset)


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    common.add_argument("--epsilon", type=float, default=None, help="score parameter in (0, 1] (default 1)")
    common.add_argument("--out", type=Path, default=None, help="output file or directory")
    common.add_argument("--full-grid", action="store_true", help="use all four relevance levels")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for grid cells")
    common.add_argument("-v", "--verbose", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="fsbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", parents=[common], help="write a synthetic dataset file")
    gen.add_argument("--problem", required=True, choices=["parity", "disjunction", "gmonks"])
    gen.add_argument("--n-relevant", type=int, required=True)
    gen.add_argument("--n-irrelevant", type=int, default=0)
    gen.add_argument("--n-redundant", type=int, default=0)
    gen.add_argument("--size", type=int, default=None, help="number of rows (overrides alpha/k)")
    gen.add_argument("--alpha", type=float, default=20.0)
    gen.add_argument("--k", type=float, default=1.0)
    gen.add_argument("--exhaustive", action="store_true", help="enumerate the full truth table")
    gen.add_argument("--repeats", type=int, default=1, help="truth-table copies in exhaustive mode")

    sel = sub.add_parser("select", parents=[common], help="run one algorithm on a dataset file")
    sel.add_argument("dataset", type=Path)
    sel.add_argument("--algorithm", required=True, type=str.lower, choices=ALGORITHMS)
    sel.add_argument("--max-iterations", type=int, default=1000)
    sel.add_argument("--patience", type=int, default=1)
    sel.add_argument("--relief-p", type=float, default=1.0)
    sel.add_argument("--lvi-p", type=float, default=0.1)
    sel.add_argument("--inducer", choices=["tree", "nb"], default="tree")

    grid = sub.add_parser("grid", parents=[common], help="run an experiment grid from a TOML config")
    grid.add_argument("config", type=Path)
    grid.add_argument("--timing", action="store_true", help="fill the elapsed_ms column (non-reproducible)")

    rep = sub.add_parser("report", parents=[common], help="aggregate a records file")
    rep.add_argument("records", type=Path)

    var = sub.add_parser("variability", parents=[common], help="inducer accuracy versus score runs")
    var.add_argument("--runs", type=int, default=10)
    var.add_argument("--patience", type=int, default=5)
    var.add_argument("--inducer", choices=["tree", "nb"], default="nb")
    return parser


def _seed(args) -> int:
    return 0 if args.seed is None else args.seed


def _epsilon(args) -> float:
    return 1.0 if args.epsilon is None else args.epsilon


def _emit_text(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def cmd_generate(args) -> int:
    schema = build_schema(args.problem, args.n_relevant, args.n_irrelevant, args.n_redundant, seed=_seed(args))
    if args.exhaustive:
        sample = exhaustive_sample(schema, args.repeats)
    else:
        size = args.size or sample_size(args.alpha, args.k, schema.n_total, 2)
        sample = generate_sample(schema, size, seed=_seed(args) + 1)
    if args.out is None:
        sys.stdout.write(format_dataset(sample))
    else:
        write_dataset(sample, args.out)
        print(f"wrote {len(sample)} rows x {schema.n_total} features to {args.out}")
    return 0


def cmd_select(args) -> int:
    sample = read_dataset(args.dataset)
    budget = SearchBudget(max_iterations=args.max_iterations, patience=args.patience, relief_p=args.relief_p,
                          lvi_p=args.lvi_p, seed=_seed(args))
    result = run_algorithm(args.algorithm, sample, budget, inducer=args.inducer)
    partition = RolePartition.from_schema(sample.schema)
    lines = []
    for s in result.solutions:
        lines.append(f"solution {'-'.join(map(str, sorted(s))) or '(empty)'} "
                     f"score {score(partition, s, _epsilon(args)):.6f}")
    lines.append(f"evaluations {result.evaluations}")
    if result.value is not None:
        lines.append(f"measure {result.value:.6f}")
    _emit_text("\n".join(lines) + "\n", args.out)
    return 0


def cmd_grid(args) -> int:
    grid = harness.load_grid(args.config)
    overrides = {}
    if args.full_grid:
        overrides["full_grid"] = True
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.epsilon is not None:
        overrides["epsilon"] = args.epsilon
    if overrides:
        grid = replace(grid, **overrides)
    records = harness.run_grid(grid, jobs=args.jobs)
    _emit_text(harness.format_records(records, timing=args.timing), args.out)
    failed = sum(r.is_diagnostic for r in records)
    print(f"{len(records)} records ({failed} diagnostic)", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    records = harness.read_results(args.records)
    out = args.out or args.records.with_suffix("")
    out.mkdir(parents=True, exist_ok=True)
    for weighted in (False, True):
        summary = harness.aggregate(records, weighted)
        tag = "weighted" if weighted else "plain"
        harness.emit_summary(summary, out / f"summary_{tag}.csv")
        harness.emit_rankings(summary, out / f"ranking_{tag}.csv")
        print(f"[{tag}] by total average: " + ", ".join(f"{a} {v:.3f}" for a, v in summary.by_total))
        print(f"[{tag}] by end point:     " + ", ".join(f"{a} {v:.3f}" for a, v in summary.by_end))
    harness.emit_curves(records, out / "curves")
    print(f"report written to {out}")
    return 0


def cmd_variability(args) -> int:
    config = harness.VariabilityConfig(runs=args.runs, patience=args.patience, inducer=args.inducer,
                                       epsilon=_epsilon(args), master_seed=_seed(args))
    report = harness.variability_experiment(config)
    _emit_text(report.table(), args.out)
    print(report.verdict(), file=sys.stderr)
    return 0


COMMANDS = {"generate": cmd_generate, "select": cmd_select, "grid": cmd_grid, "report": cmd_report,
            "variability": cmd_variability}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
