"""Command-line interface: ``sim run``, ``sim converge`` and ``sim list``.

Exit codes: 0 on success, 2 for configuration errors, 3 when a run fails
(mesh inversion, solver breakdown, non-finite state).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .app import run_builtin_study, run_scenario
from .config import OutputSpec, parse_config
from .errors import ConfigError, SimulationError
from .scenarios import BUILTINS, STUDIES

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sim", description="Variational Lagrangian fluid simulator.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario from a JSON file or a builtin name")
    run.add_argument("scenario", help="path to a JSON configuration or a builtin name")
    run.add_argument("--out", type=Path, help="output directory for snapshots and diagnostics")
    run.add_argument("--steps", type=int, help="override the number of steps")
    run.add_argument("--dt", type=float, help="override the time step")

    conv = sub.add_parser("converge", help="run a builtin convergence study")
    conv.add_argument("scenario", help="builtin study name (see 'sim list')")
    conv.add_argument("--axis", choices=("time", "space"), required=True)
    conv.add_argument("--levels", type=int, help="number of refinement levels to use (>= 2)")
    conv.add_argument("--out", type=Path, help="directory for convergence.csv")

    sub.add_parser("list", help="list builtin scenarios and studies")
    return parser


def _cmd_run(args) -> int:
    try:
        config = parse_config(args.scenario)
        overrides = {}
        if args.steps is not None:
            overrides["steps"] = args.steps
        if args.dt is not None:
            overrides["dt"] = args.dt
        if args.out is not None:
            overrides["output"] = OutputSpec(
                config.output.snapshot_stride, config.output.diagnostics_stride, str(args.out)
            )
        config = replace(config, **overrides)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"sim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = run_scenario(config, keep_snapshots=False)
    last = result.diagnostics[-1] if result.diagnostics else None
    if last is not None:
        print(f"{config.name}: t = {last.t:.6g} s, E = {last.e_total:.10g} J")
    if not result.ok:
        print(f"sim: run failed at step {result.failed_step}: {result.error}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_converge(args) -> int:
    if (args.scenario, args.axis) not in STUDIES:
        print(f"sim: configuration error: no {args.axis} study named {args.scenario!r}", file=sys.stderr)
        return EXIT_CONFIG
    if args.levels is not None and args.levels < 2:
        print("sim: configuration error: --levels must be at least 2", file=sys.stderr)
        return EXIT_CONFIG
    try:
        study = run_builtin_study(args.scenario, args.axis, args.levels)
    except SimulationError as exc:
        print(f"sim: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(study.report.table())
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        study.report.write_csv(args.out / "convergence.csv")
    return EXIT_OK


def _cmd_list(args) -> int:
    print("scenarios:")
    for name in BUILTINS:
        print(f"  {name}")
    print("convergence studies:")
    for name, axis in STUDIES:
        print(f"  {name} --axis {axis}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    handler = {"run": _cmd_run, "converge": _cmd_converge, "list": _cmd_list}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
