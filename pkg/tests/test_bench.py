from __future__ import annotations

import math
import time

import pytest

from spdireach import fixtures
from spdireach.bench import (
    BenchError,
    RunRecord,
    aggregate,
    render_table,
    run_bench,
    to_csv,
)
from spdireach.explorer import SolveTimeout
from spdireach.model import EdgeInterval, ReachTask


def _task(start, final):
    return ReachTask(
        start=tuple(EdgeInterval(e, lo, hi) for e, lo, hi in start),
        final=tuple(EdgeInterval(e, lo, hi) for e, lo, hi in final),
    )


def _forward(hc):
    return _task([(fixtures.HC_LEFT, 0.2, 0.8)], [(fixtures.HC_RIGHT, 0.0, 1.0)])


def _rec(task, threads, seconds, timed_out=False, verdict="REACHABLE", rep=0):
    return RunRecord(task, threads, rep, seconds, timed_out, None if timed_out else verdict)


# -- aggregation is a pure function of the records --------------------------


def test_aggregate_is_permutation_invariant():
    runs = [
        _rec(0, 1, 0.4), _rec(1, 1, 0.2), _rec(0, 2, 0.1), _rec(1, 2, 0.1),
        _rec(2, 1, 1.0, timed_out=True), _rec(2, 2, 0.3),
    ]
    forward = aggregate(runs, [1, 2])
    backward = aggregate(list(reversed(runs)), [1, 2])
    assert forward == backward


def test_timeout_excludes_the_task_at_every_thread_count():
    # Task 0 only times out at 8 threads, but its 1-thread run must not
    # count either, or the columns would average different task sets.
    runs = [
        _rec(0, 1, 0.05), _rec(1, 1, 0.4),
        _rec(0, 8, 5.0, timed_out=True), _rec(1, 8, 0.1),
    ]
    excluded, means, speedups = aggregate(runs, [1, 8])
    assert excluded == (0,)
    assert means[1] == pytest.approx(0.4)
    assert means[8] == pytest.approx(0.1)
    assert speedups[8] == pytest.approx(4.0)


def test_speedups_are_relative_to_the_first_thread_count():
    runs = [_rec(0, 1, 0.4), _rec(0, 2, 0.1)]
    _, means, speedups = aggregate(runs, [1, 2])
    assert speedups[1] == 1.0
    assert speedups[2] == pytest.approx(4.0)


def test_thread_count_without_runs_aggregates_to_nan():
    _, means, speedups = aggregate([_rec(0, 1, 0.2)], [1, 2])
    assert means[1] == pytest.approx(0.2)
    assert math.isnan(means[2]) and math.isnan(speedups[2])


def test_contradicting_verdicts_are_a_hard_error():
    runs = [
        _rec(0, 1, 0.1, verdict="REACHABLE"),
        _rec(0, 2, 0.1, verdict="UNREACHABLE"),
    ]
    with pytest.raises(BenchError, match="contradicts"):
        aggregate(runs, [1, 2])


def test_repeated_runs_average_within_a_task_first():
    runs = [
        _rec(0, 1, 0.1, rep=0), _rec(0, 1, 0.3, rep=1),
        _rec(1, 1, 0.6, rep=0), _rec(1, 1, 0.6, rep=1),
    ]
    _, means, _ = aggregate(runs, [1])
    assert means[1] == pytest.approx((0.2 + 0.6) / 2)


# -- the harness around a controllable solver --------------------------------


def test_timed_out_run_contributes_exactly_the_budget(hcorridor):
    tasks = [_forward(hcorridor), _forward(hcorridor)]

    def solver(spdi, task, workers, timeout_s):
        if task is tasks[1]:
            raise SolveTimeout("injected")
        return "REACHABLE"

    report = run_bench(hcorridor, tasks, [1, 2], timeout_s=3.25, solver=solver, warmup=False)
    slow = [r for r in report.runs if r.task_index == 1]
    assert len(slow) == 2
    assert all(r.timed_out and r.seconds == 3.25 for r in slow)
    assert report.excluded_tasks == (1,)


def test_overlong_run_is_clipped_to_the_budget(hcorridor):
    def solver(spdi, task, workers, timeout_s):
        time.sleep(0.03)
        return "REACHABLE"

    report = run_bench(hcorridor, [_forward(hcorridor)], [1], timeout_s=0.01,
                       solver=solver, warmup=False)
    assert report.runs[0].seconds == 0.01
    assert not report.runs[0].timed_out


def test_warmup_runs_once_per_thread_count_and_is_discarded(hcorridor):
    calls = []

    def solver(spdi, task, workers, timeout_s):
        calls.append(workers)
        return "REACHABLE"

    tasks = [_forward(hcorridor), _forward(hcorridor)]
    report = run_bench(hcorridor, tasks, [1, 2], reps=2, solver=solver)
    assert len(calls) == 2 + 2 * 2 * 2
    assert len(report.runs) == 2 * 2 * 2


def test_verdict_flip_across_thread_counts_fails_the_bench(hcorridor):
    def solver(spdi, task, workers, timeout_s):
        return "REACHABLE" if workers == 1 else "UNREACHABLE"

    with pytest.raises(BenchError, match="contradicts"):
        run_bench(hcorridor, [_forward(hcorridor)], [1, 2], solver=solver, warmup=False)


def test_input_validation(hcorridor):
    with pytest.raises(ValueError, match="no tasks"):
        run_bench(hcorridor, [], [1])
    with pytest.raises(ValueError, match="no thread counts"):
        run_bench(hcorridor, [_forward(hcorridor)], [])
    with pytest.raises(ValueError, match="reps"):
        run_bench(hcorridor, [_forward(hcorridor)], [1], reps=0)


# -- rendering ---------------------------------------------------------------


def _fake_report(hcorridor, with_timeout=False):
    tasks = [_forward(hcorridor), _forward(hcorridor)]

    def solver(spdi, task, workers, timeout_s):
        if with_timeout and task is tasks[1]:
            raise SolveTimeout("injected")
        return "REACHABLE"

    return run_bench(hcorridor, tasks, [1, 2, 4], timeout_s=2.0, solver=solver, warmup=False)


def test_table_has_thread_mean_and_speedup_rows(hcorridor):
    lines = render_table(_fake_report(hcorridor)).splitlines()
    assert lines[0].startswith("threads")
    assert lines[1].startswith("mean (s)")
    assert lines[2].startswith("speedup")
    assert lines[0].split()[1:] == ["1", "2", "4"]


def test_table_reports_exclusions(hcorridor):
    text = render_table(_fake_report(hcorridor, with_timeout=True))
    assert "excluded 1 task(s) after timeout: 1" in text


def test_csv_lists_runs_then_summary_rows(hcorridor):
    report = _fake_report(hcorridor)
    lines = to_csv(report).strip().splitlines()
    assert lines[0] == "task_index,threads,rep,seconds,timed_out,verdict"
    assert len(lines) == 1 + len(report.runs) + 2 * len(report.thread_counts)
    assert sum(1 for line in lines if line.startswith("mean,")) == 3
    assert sum(1 for line in lines if line.startswith("speedup,")) == 3


# -- one real end-to-end run --------------------------------------------------


def test_real_solver_smoke(hcorridor):
    report = run_bench(hcorridor, [_forward(hcorridor)], [1, 2], timeout_s=5.0, warmup=False)
    assert report.excluded_tasks == ()
    assert all(r.verdict == "REACHABLE" for r in report.runs)
    assert report.means[1] > 0.0 and report.means[2] > 0.0
    assert report.speedups[1] == 1.0
    assert report.metadata["tasks"] == "1"
