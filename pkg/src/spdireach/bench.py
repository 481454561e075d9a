"""Wall-clock benchmark harness for the reachability solver.

The harness itself is single-threaded: runs execute one at a time, grouped
by worker count, with one discarded warm-up run per worker count.  A run
that hits the time budget is recorded as exactly the budget, and its task
is excluded from the means at every worker count so that aggregates stay
comparable.  Aggregation is a pure function of the recorded runs, so the
report does not depend on execution order.
"""

from __future__ import annotations

import math
import platform
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .explorer import SolveTimeout
from .model import ReachTask, Spdi
from .parallel import solve


class BenchError(RuntimeError):
    """Inconsistent benchmark results (verdicts disagree across runs)."""


@dataclass(frozen=True)
class RunRecord:
    task_index: int
    threads: int
    rep: int
    seconds: float  # clipped to [0, timeout]; exactly the budget when timed out
    timed_out: bool
    verdict: Optional[str]


@dataclass(frozen=True)
class BenchReport:
    thread_counts: tuple[int, ...]
    runs: tuple[RunRecord, ...]
    excluded_tasks: tuple[int, ...]
    means: dict[int, float]
    speedups: dict[int, float]
    timeout_s: float
    metadata: dict[str, str]


Solver = Callable[[Spdi, ReachTask, int, float], str]


def _default_solver(spdi: Spdi, task: ReachTask, workers: int, timeout_s: float) -> str:
    return solve(spdi, task, workers=workers, timeout_s=timeout_s).verdict


def aggregate(
    runs: Sequence[RunRecord], thread_counts: Sequence[int]
) -> tuple[tuple[int, ...], dict[int, float], dict[int, float]]:
    """Excluded task set, per-thread-count means, and speed-ups over 1 thread.

    Pure: permuting ``runs`` cannot change the result.  A task that timed
    out anywhere is dropped from every mean.  Verdict disagreement between
    completed runs of the same task is a hard error.
    """
    verdicts: dict[int, str] = {}
    excluded: set[int] = set()
    for run in runs:
        if run.timed_out:
            excluded.add(run.task_index)
            continue
        if run.verdict is None:
            continue
        seen = verdicts.setdefault(run.task_index, run.verdict)
        if seen != run.verdict:
            raise BenchError(
                f"task {run.task_index}: verdict {run.verdict!r} at {run.threads} "
                f"thread(s) contradicts {seen!r}"
            )
    per_task: dict[int, dict[int, list[float]]] = {}
    for run in runs:
        if run.task_index in excluded:
            continue
        per_task.setdefault(run.threads, {}).setdefault(run.task_index, []).append(run.seconds)
    means: dict[int, float] = {}
    for k in thread_counts:
        table = per_task.get(k, {})
        if table:
            task_means = [sum(v) / len(v) for _, v in sorted(table.items())]
            means[k] = sum(task_means) / len(task_means)
        else:
            means[k] = math.nan
    base = means.get(thread_counts[0]) if thread_counts else math.nan
    speedups = {}
    for k in thread_counts:
        if k == thread_counts[0]:
            speedups[k] = 1.0
        else:
            speedups[k] = base / means[k] if means[k] > 0 else math.nan
    return tuple(sorted(excluded)), means, speedups


def run_bench(
    spdi: Spdi,
    tasks: Sequence[ReachTask],
    thread_counts: Sequence[int],
    timeout_s: float = 5.0,
    reps: int = 1,
    solver: Optional[Solver] = None,
    warmup: bool = True,
) -> BenchReport:
    if not tasks:
        raise ValueError("no tasks to benchmark")
    if not thread_counts:
        raise ValueError("no thread counts to benchmark")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    run_one = solver or _default_solver
    records: list[RunRecord] = []
    for k in thread_counts:
        if warmup:
            try:
                run_one(spdi, tasks[0], k, timeout_s)
            except SolveTimeout:
                pass
        for rep in range(reps):
            for i, task in enumerate(tasks):
                start = time.perf_counter()
                verdict: Optional[str] = None
                timed_out = False
                try:
                    verdict = run_one(spdi, task, k, timeout_s)
                except SolveTimeout:
                    timed_out = True
                elapsed = time.perf_counter() - start
                seconds = float(timeout_s) if timed_out else min(max(elapsed, 0.0), float(timeout_s))
                records.append(RunRecord(i, k, rep, seconds, timed_out, verdict))
    counts = tuple(thread_counts)
    excluded, means, speedups = aggregate(records, counts)
    return BenchReport(
        thread_counts=counts,
        runs=tuple(records),
        excluded_tasks=excluded,
        means=means,
        speedups=speedups,
        timeout_s=float(timeout_s),
        metadata={
            "platform": platform.platform(),
            "python": platform.python_version(),
            "machine": platform.machine(),
            "tasks": str(len(tasks)),
            "reps": str(reps),
        },
    )


def render_table(report: BenchReport) -> str:
    """Aligned text table: one column per thread count, mean and speed-up rows."""
    cols = [str(k) for k in report.thread_counts]
    mean_cells = [f"{report.means[k]:.4f}" for k in report.thread_counts]
    speed_cells = [f"{report.speedups[k]:.2f}" for k in report.thread_counts]
    widths = [
        max(len(a), len(b), len(c), 6) for a, b, c in zip(cols, mean_cells, speed_cells)
    ]
    head = "threads   " + "  ".join(c.rjust(w) for c, w in zip(cols, widths))
    mean = "mean (s)  " + "  ".join(c.rjust(w) for c, w in zip(mean_cells, widths))
    speed = "speedup   " + "  ".join(c.rjust(w) for c, w in zip(speed_cells, widths))
    lines = [head, mean, speed]
    if report.excluded_tasks:
        lines.append(
            f"excluded {len(report.excluded_tasks)} task(s) after timeout: "
            + ", ".join(str(t) for t in report.excluded_tasks)
        )
    return "\n".join(lines)


def to_csv(report: BenchReport) -> str:
    """Per-run rows followed by summary rows, as CSV text."""
    lines = ["task_index,threads,rep,seconds,timed_out,verdict"]
    for run in report.runs:
        lines.append(
            f"{run.task_index},{run.threads},{run.rep},{run.seconds:.6f},"
            f"{int(run.timed_out)},{run.verdict or ''}"
        )
    for k in report.thread_counts:
        lines.append(f"mean,{k},,{report.means[k]:.6f},,")
        lines.append(f"speedup,{k},,{report.speedups[k]:.4f},,")
    return "\n".join(lines) + "\n"
