"""Command-line front end.

Exit codes: 0 for success (including a REACHABLE verdict), 1 for an
UNREACHABLE verdict, 2 for usage or validation problems, 3 for internal
failures (generation dead ends, benchmark inconsistencies, solver limits).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .bench import render_table, run_bench, to_csv
from .explorer import REACHABLE, solve_sequential
from .generator import GenConfig, generate_spdi, generate_tasks
from .io_formats import (
    FormatError,
    parse_spdi,
    parse_task,
    parse_tasks,
    parse_witness,
    write_spdi,
    write_tasks,
    write_witness,
)
from .model import ModelError
from .parallel import solve
from .plot import render_plot


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _cmd_validate(args: argparse.Namespace) -> int:
    spdi = parse_spdi(_read(args.spdi))
    problems = spdi.violations()
    if problems:
        for line in problems:
            print(line, file=sys.stderr)
        return 2
    print(f"ok: {len(spdi.regions)} regions, {len(spdi.edges)} edges")
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    spdi = parse_spdi(_read(args.spdi))
    task = parse_task(_read(args.task), spdi)
    if args.seq:
        result = solve_sequential(spdi, task)
    else:
        result = solve(spdi, task, workers=args.threads)
    print(result.verdict)
    if args.witness and result.witness is not None:
        _write(args.witness, write_witness(result))
    return 0 if result.verdict == REACHABLE else 1


def _cmd_gen(args: argparse.Namespace) -> int:
    cfg = GenConfig(
        n_regions=args.regions,
        seed=args.seed,
        side=args.side,
        max_retries=args.max_retries,
    )
    spdi = generate_spdi(cfg)
    _write(args.out, write_spdi(spdi))
    print(f"wrote {args.out}: {len(spdi.regions)} regions, {len(spdi.edges)} edges")
    return 0


def _cmd_gen_tasks(args: argparse.Namespace) -> int:
    spdi = parse_spdi(_read(args.spdi))
    tasks = generate_tasks(spdi, args.count, args.seed)
    _write(args.out, write_tasks(tasks))
    print(f"wrote {args.out}: {len(tasks)} tasks")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    spdi = parse_spdi(_read(args.spdi))
    tasks = parse_tasks(_read(args.tasks), spdi)
    threads = [int(tok) for tok in args.threads.split(",") if tok.strip()]
    if not threads or any(t < 1 for t in threads):
        raise ValueError(f"bad thread list {args.threads!r}")
    report = run_bench(spdi, tasks, threads, timeout_s=args.timeout, reps=args.reps)
    print(render_table(report))
    if args.csv:
        _write(args.csv, to_csv(report))
    return 0


def _cmd_plot(args: argparse.Namespace) -> int:
    spdi = parse_spdi(_read(args.spdi))
    task = parse_task(_read(args.task), spdi) if args.task else None
    witness = parse_witness(_read(args.witness)) if args.witness else None
    _write(args.out, render_plot(spdi, task=task, witness=witness))
    print(f"wrote {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spdireach",
        description="Reachability analysis for polygonal differential inclusions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("spdi")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("solve", help="decide edge-interval reachability")
    p.add_argument("spdi")
    p.add_argument("task")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--witness", help="write the witness path here when reachable")
    p.add_argument("--seq", action="store_true", help="bypass the parallel engine")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--regions", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--side", type=float, default=1000.0)
    p.add_argument("--max-retries", type=int, default=32)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("gen-tasks", help="generate random tasks for an instance")
    p.add_argument("--spdi", required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_gen_tasks)

    p = sub.add_parser("bench", help="time the solver across worker counts")
    p.add_argument("--spdi", required=True)
    p.add_argument("--tasks", required=True)
    p.add_argument("--threads", default="1,2,3,4,5,6,7,8")
    p.add_argument("--timeout", type=float, default=5.0)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--csv", help="also write per-run records here")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("plot", help="render an instance (and optional task/witness) as SVG")
    p.add_argument("--spdi", required=True)
    p.add_argument("--task")
    p.add_argument("--witness")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return args.func(args)
    except (FormatError, ModelError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
