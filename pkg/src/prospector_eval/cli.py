"""Command-line interface.

Subcommands:

* ``generate``    — write a batch of random networks to a network file
* ``evaluate``    — sweep networks from a file, write per-update results CSV
* ``report``      — aggregate networks from a file into a study report JSON
* ``case-study``  — run a built-in benchmark network, write its error surface
* ``oracle``      — print the correct posterior for one update
* ``surface``     — write one rule set's error surface for one network

Exit codes: 0 success, 1 runtime failure (infeasible update, no
convergence, invalid table, I/O), 2 usage error (bad flags or unusable
inputs).  Human-readable numbers are printed with 6 significant digits;
files always carry 17.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence

from .cases import CASE_STUDY_IDS, case_study_table
from .engine import Rule, infer
from .errors import ProspectorEvalError
from .generate import (
    DEFAULT_BASE_RATE_MARGIN,
    DEFAULT_IPF_MAX_ITERATIONS,
    DEFAULT_IPF_TOLERANCE,
    DEFAULT_MAX_RESAMPLES,
    GenerationConfig,
    generate,
)
from .oracle import (
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_TOLERANCE,
    EvidenceUpdate,
    correct_posterior,
)
from .study import (
    DEFAULT_SEED,
    DEFAULT_UPDATE_GRID,
    RULE_ORDER,
    build_report,
    error_surface,
    evaluate_network,
    evaluate_tables,
    format_class_table,
    report_json_text,
    results_csv_text,
    summarize,
    surface_csv_text,
)
from .table import JointTable, conditional_profile, load_networks, network_view, save_networks

WORKERS_ENV_VAR = "PROSPECTOR_EVAL_WORKERS"


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


def _parse_grid(text: str, parser: argparse.ArgumentParser) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        parser.error(f"--grid must be a comma-separated list of numbers, got {text!r}")
    if not values or any(not 0.0 <= v <= 1.0 for v in values):
        parser.error("--grid values must lie in [0, 1] and the list must be nonempty")
    return values


def _add_oracle_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--oracle-tolerance",
        type=float,
        default=DEFAULT_TOLERANCE,
        help="marginal tolerance for the correct-answer projection",
    )
    sub.add_argument(
        "--oracle-max-iterations",
        type=int,
        default=DEFAULT_MAX_ITERATIONS,
        help="iteration cap for the correct-answer projection",
    )


def _add_sweep_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--networks", required=True, help="network file to read")
    sub.add_argument("--out", required=True, help="output file to write")
    sub.add_argument(
        "--grid",
        default=",".join(str(v) for v in DEFAULT_UPDATE_GRID),
        help="comma-separated per-axis update values (default quarter steps)",
    )
    sub.add_argument(
        "--filter",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="screen out networks whose profile is not monotone",
    )
    sub.add_argument(
        "--filter-mode",
        choices=("full", "e2-only"),
        default="full",
        help="monotonicity comparisons: each evidence variable, or E2 only",
    )
    sub.add_argument(
        "--workers",
        type=int,
        default=_default_workers(),
        help=f"parallel evaluation processes (default ${WORKERS_ENV_VAR} or 1)",
    )
    _add_oracle_flags(sub)


def _add_network_selection(sub: argparse.ArgumentParser) -> None:
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--case", type=int, choices=CASE_STUDY_IDS, help="built-in case study")
    group.add_argument("--networks", help="network file to read")
    sub.add_argument(
        "--index", type=int, default=0, help="network index within --networks (default 0)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prospector-eval",
        description="Uncertain inference on two-evidence networks: rule sets vs the correct answer.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("generate", help="write a batch of random networks")
    gen.add_argument("--kind", required=True, choices=("independent", "associated"))
    gen.add_argument("--count", type=int, default=400, help="networks to generate")
    gen.add_argument("--seed", type=int, default=DEFAULT_SEED, help="stream seed")
    gen.add_argument("--out", required=True, help="network file to write")
    gen.add_argument("--base-rate-margin", type=float, default=DEFAULT_BASE_RATE_MARGIN)
    gen.add_argument("--ipf-tolerance", type=float, default=DEFAULT_IPF_TOLERANCE)
    gen.add_argument("--ipf-max-iterations", type=int, default=DEFAULT_IPF_MAX_ITERATIONS)
    gen.add_argument("--max-resamples", type=int, default=DEFAULT_MAX_RESAMPLES)

    ev = commands.add_parser("evaluate", help="write per-update results for a network file")
    _add_sweep_flags(ev)

    rep = commands.add_parser("report", help="write the aggregate study report for a network file")
    _add_sweep_flags(rep)

    case = commands.add_parser("case-study", help="run a built-in benchmark network")
    case.add_argument("--id", type=int, required=True, choices=CASE_STUDY_IDS)
    case.add_argument("--out", required=True, help="error-surface CSV to write")
    case.add_argument("--step", type=float, default=0.05, help="surface lattice step")
    case.add_argument(
        "--grid",
        default=",".join(str(v) for v in DEFAULT_UPDATE_GRID),
        help="update grid for the printed summary statistics",
    )
    _add_oracle_flags(case)

    orc = commands.add_parser("oracle", help="print the correct posterior for one update")
    _add_network_selection(orc)
    orc.add_argument("--e1", type=float, required=True, help="new probability of E1")
    orc.add_argument("--e2", type=float, required=True, help="new probability of E2")
    _add_oracle_flags(orc)

    surf = commands.add_parser("surface", help="write one rule set's error surface")
    _add_network_selection(surf)
    surf.add_argument(
        "--rule", required=True, choices=tuple(rule.value for rule in RULE_ORDER)
    )
    surf.add_argument("--step", type=float, default=0.05, help="surface lattice step")
    surf.add_argument("--out", required=True, help="error-surface CSV to write")
    _add_oracle_flags(surf)

    return parser


def _load_networks_checked(path: str, parser: argparse.ArgumentParser) -> list[JointTable]:
    try:
        tables = load_networks(path)
    except FileNotFoundError:
        parser.error(f"network file not found: {path}")
    except ProspectorEvalError as exc:
        parser.error(f"unusable network file {path}: {exc}")
    if not tables:
        parser.error(f"network file {path} contains no networks")
    return tables


def _select_network(args, parser: argparse.ArgumentParser) -> JointTable:
    if args.case is not None:
        return case_study_table(args.case)
    tables = _load_networks_checked(args.networks, parser)
    if not 0 <= args.index < len(tables):
        parser.error(f"--index {args.index} out of range (file has {len(tables)} networks)")
    return tables[args.index]


def _cmd_generate(args, parser) -> int:
    try:
        config = GenerationConfig(
            count=args.count,
            seed=args.seed,
            kind=args.kind,
            base_rate_margin=args.base_rate_margin,
            ipf_tolerance=args.ipf_tolerance,
            ipf_max_iterations=args.ipf_max_iterations,
            max_resamples=args.max_resamples,
        )
    except ValueError as exc:
        parser.error(str(exc))
    tables = generate(config)
    save_networks(tables, args.out)
    print(f"wrote {len(tables)} {args.kind} networks to {args.out}")
    return 0


def _run_sweep(args, parser):
    tables = _load_networks_checked(args.networks, parser)
    grid = _parse_grid(args.grid, parser)
    evaluations = evaluate_tables(
        tables,
        grid=grid,
        filter_enabled=args.filter,
        filter_mode=args.filter_mode,
        oracle_tolerance=args.oracle_tolerance,
        oracle_max_iterations=args.oracle_max_iterations,
        workers=max(1, args.workers),
    )
    counts: dict[str, int] = {}
    for table in tables:
        counts[table.kind] = counts.get(table.kind, 0) + 1
    report = build_report(
        evaluations,
        counts,
        grid=grid,
        filter_enabled=args.filter,
        filter_mode=args.filter_mode,
    )
    return evaluations, report


def _cmd_evaluate(args, parser) -> int:
    evaluations, report = _run_sweep(args, parser)
    Path(args.out).write_text(results_csv_text(evaluations), encoding="utf-8")
    kept = sum(cls.filtered_in for cls in report.classes.values())
    total = sum(cls.generated for cls in report.classes.values())
    print(f"evaluated {kept} of {total} networks; results written to {args.out}")
    return 0


def _cmd_report(args, parser) -> int:
    _, report = _run_sweep(args, parser)
    Path(args.out).write_text(report_json_text(report), encoding="utf-8")
    print(format_class_table(report), end="")
    print(f"report written to {args.out}")
    return 0


def _cmd_case_study(args, parser) -> int:
    table = case_study_table(args.id)
    grid = _parse_grid(args.grid, parser)
    view = network_view(table)
    profile = conditional_profile(table)
    records = evaluate_network(
        table,
        grid,
        network_id=f"case-{args.id}",
        oracle_tolerance=args.oracle_tolerance,
        oracle_max_iterations=args.oracle_max_iterations,
    )
    summary = summarize(records)
    points = error_surface(
        table,
        Rule.INDEPENDENT,
        args.step,
        oracle_tolerance=args.oracle_tolerance,
        oracle_max_iterations=args.oracle_max_iterations,
    )
    Path(args.out).write_text(surface_csv_text(points), encoding="utf-8")

    q = profile.as_tuple()
    print(f"case study {args.id}")
    print(
        "conditional profile: "
        f"P(C|ff)={q[0]:.6g} P(C|ft)={q[1]:.6g} P(C|tf)={q[2]:.6g} P(C|tt)={q[3]:.6g}"
    )
    print(
        f"prior P(C)={view.p_c:.6g}; base rates P(E1)={view.p_e[0]:.6g} P(E2)={view.p_e[1]:.6g}"
    )
    for rule in RULE_ORDER:
        stats = summary.stats[rule]
        print(
            f"{rule.value:<12} avg signed {stats.mean_signed:+.6g}  "
            f"avg |err| {stats.mean_abs:.6g}  max |err| {stats.max_abs:.6g}"
        )
    print(
        f"independent-rule surface (step {args.step:g}, {len(points)} points) written to {args.out}"
    )
    return 0


def _cmd_oracle(args, parser) -> int:
    table = _select_network(args, parser)
    for name, value in (("--e1", args.e1), ("--e2", args.e2)):
        if not 0.0 <= value <= 1.0:
            parser.error(f"{name} must lie in [0, 1], got {value}")
    posterior = correct_posterior(
        table,
        EvidenceUpdate(args.e1, args.e2),
        tolerance=args.oracle_tolerance,
        max_iterations=args.oracle_max_iterations,
    )
    print(f"{posterior:.6g}")
    return 0


def _cmd_surface(args, parser) -> int:
    table = _select_network(args, parser)
    points = error_surface(
        table,
        Rule(args.rule),
        args.step,
        oracle_tolerance=args.oracle_tolerance,
        oracle_max_iterations=args.oracle_max_iterations,
    )
    Path(args.out).write_text(surface_csv_text(points), encoding="utf-8")
    print(f"wrote {len(points)} surface points to {args.out}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            return _cmd_generate(args, parser)
        if args.command == "evaluate":
            return _cmd_evaluate(args, parser)
        if args.command == "report":
            return _cmd_report(args, parser)
        if args.command == "case-study":
            return _cmd_case_study(args, parser)
        if args.command == "oracle":
            return _cmd_oracle(args, parser)
        if args.command == "surface":
            return _cmd_surface(args, parser)
        parser.error(f"unknown command {args.command!r}")
    except ProspectorEvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
