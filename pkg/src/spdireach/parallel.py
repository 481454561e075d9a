"""Work-stealing thread pool around the depth-first explorer.

The queue is seeded with one work item per start interval, in task order.
A worker that reaches a branch point hands all but one child to the queue,
but only while some other worker is idle, so a single worker explores in
exactly the sequential order and yields byte-identical results.  The first
worker to find a witness publishes it and flips a halt flag that everyone
polls every few steps; remaining work is then discarded.  The run ends when
every created item has been fully explored (unreachable), when a witness is
found, when the deadline passes, or when a worker crashes, in which case
the original exception is re-raised wrapped in EngineError.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .explorer import (
    MAX_SOLVE_STEPS,
    REACHABLE,
    UNREACHABLE,
    ExplorationState,
    ReachResult,
    SolveLimitExceeded,
    SolveStats,
    SolveTimeout,
    Witness,
    _Aborted,
    SearchGuide,
    coreach_excludes,
    final_intervals_by_edge,
    forward_closure,
    immediate_overlap,
    make_search_guide,
    signatures_exploration,
)
from .model import ModelError, ReachTask, Spdi, validate_task


class EngineError(RuntimeError):
    """A worker thread failed; wraps the original exception."""


@dataclass(frozen=True)
class EngineConfig:
    workers: int = 1
    poll_interval: int = 64
    queue_capacity: int = 0  # 0 means unbounded
    split_after: int = 192  # steps a worker must run between handoffs


@dataclass
class WorkItem:
    state: ExplorationState
    edge: str
    interval: tuple[float, float]


@dataclass
class EngineStats:
    items_created: int = 0
    items_completed: int = 0
    handoffs: int = 0
    idle_final: int = 0
    worker_steps: list[int] = field(default_factory=list)


class _Engine:
    def __init__(
        self,
        spdi: Spdi,
        final_by_edge: dict,
        config: EngineConfig,
        max_steps: int,
        deadline: Optional[float],
        guide: Optional[SearchGuide] = None,
    ):
        self.spdi = spdi
        self.final_by_edge = final_by_edge
        self.guide = guide if guide is not None else make_search_guide(spdi, final_by_edge)
        self.config = config
        self.max_steps = max_steps
        self.deadline = deadline
        self.cond = threading.Condition()
        self.queue: deque[WorkItem] = deque()
        self.outstanding = 0
        self.idle = config.workers
        self.halt = threading.Event()
        self.witness: Optional[Witness] = None
        self.error: Optional[BaseException] = None
        self.stats = EngineStats()
        self.total_steps = 0
        self.total_accel = 0

    def seed(self, items: list[WorkItem]) -> None:
        with self.cond:
            self.queue.extend(items)
            self.outstanding += len(items)
            self.stats.items_created += len(items)
            self.cond.notify_all()

    def publish_success(self, witness: Witness) -> None:
        with self.cond:
            if self.witness is None and self.error is None:
                self.witness = witness
            self.halt.set()
            self.cond.notify_all()

    def publish_error(self, exc: BaseException) -> None:
        with self.cond:
            if self.error is None and self.witness is None:
                self.error = exc
            self.halt.set()
            self.cond.notify_all()

    def on_branch(self, state: ExplorationState, children: list) -> list:
        if len(children) < 2 or self.idle <= 0:
            return children
        cap = self.config.queue_capacity
        with self.cond:
            room = len(children) - 1
            if cap:
                room = min(room, max(0, cap - len(self.queue)))
            if room <= 0:
                return children
            handed = children[:room]
            for edge, iv in handed:
                self.queue.append(WorkItem(state.clone(), edge, iv))
            self.outstanding += len(handed)
            self.stats.items_created += len(handed)
            self.stats.handoffs += 1
            self.cond.notify_all()
        return children[len(handed):]

    def make_control(self, local: SolveStats):
        poll = self.config.poll_interval

        def control(stats: SolveStats) -> None:
            if stats.steps % poll != 0:
                return
            if self.halt.is_set():
                raise _Aborted()
            if self.deadline is not None and time.monotonic() > self.deadline:
                raise SolveTimeout("solve deadline expired")
            if self.total_steps + stats.steps > self.max_steps:
                raise SolveLimitExceeded(f"exceeded {self.max_steps} exploration steps")

        return control

    def run_item(self, item: WorkItem, local: SolveStats) -> None:
        # Rate-limit shedding: a freshly dequeued item keeps its first
        # split_after steps to itself, and pays the same again after every
        # handoff.  Without this, starved workers chop the search into
        # items of a few steps each and queue churn dominates the run.
        gate = self.config.split_after
        earned = local.steps

        def on_branch(state: ExplorationState, children: list) -> list:
            nonlocal earned
            if local.steps - earned < gate:
                return children
            kept = self.on_branch(state, children)
            if len(kept) != len(children):
                earned = local.steps
            return kept

        witness = signatures_exploration(
            self.spdi,
            self.final_by_edge,
            item.state,
            item.edge,
            item.interval,
            local,
            control=self.make_control(local),
            on_branch=on_branch,
            guide=self.guide,
        )
        if witness is not None:
            self.publish_success(witness)

    def worker(self) -> None:
        local = SolveStats()
        try:
            while True:
                with self.cond:
                    while True:
                        if self.halt.is_set() or self.error is not None:
                            return
                        if self.outstanding == 0 and not self.queue:
                            return
                        if self.queue:
                            item = self.queue.popleft()
                            self.idle -= 1
                            break
                        self.cond.wait(0.02)
                try:
                    self.run_item(item, local)
                except _Aborted:
                    pass
                finally:
                    with self.cond:
                        self.idle += 1
                        self.outstanding -= 1
                        self.stats.items_completed += 1
                        if self.outstanding == 0 or self.halt.is_set():
                            self.cond.notify_all()
        except BaseException as exc:  # noqa: BLE001 - reported to the caller
            self.publish_error(exc)
        finally:
            with self.cond:
                self.total_steps += local.steps
                self.total_accel += local.accelerations
                self.stats.worker_steps.append(local.steps)


def solve_parallel(
    spdi: Spdi,
    task: ReachTask,
    config: EngineConfig = EngineConfig(),
    *,
    max_steps: int = MAX_SOLVE_STEPS,
    timeout_s: Optional[float] = None,
) -> ReachResult:
    """Decide reachability with a pool of exploring workers.

    With config.workers == 1 the result is identical to solve_sequential.
    """
    if config.workers < 1:
        raise ValueError("workers must be >= 1")
    errors = validate_task(spdi, task)
    if errors:
        raise ModelError("; ".join(errors))
    t0 = time.perf_counter()
    quick = immediate_overlap(task)
    if quick is not None:
        stats = SolveStats(workers=config.workers, duration_s=time.perf_counter() - t0)
        return ReachResult(REACHABLE, quick, stats)
    if forward_closure(spdi, task):
        stats = SolveStats(workers=config.workers, duration_s=time.perf_counter() - t0)
        return ReachResult(UNREACHABLE, None, stats)
    final_by_edge = final_intervals_by_edge(task)
    guide = make_search_guide(spdi, final_by_edge)
    if coreach_excludes(guide, task):
        stats = SolveStats(workers=config.workers, duration_s=time.perf_counter() - t0)
        return ReachResult(UNREACHABLE, None, stats)
    deadline = None if timeout_s is None else time.monotonic() + timeout_s
    engine = _Engine(spdi, final_by_edge, config, max_steps, deadline, guide=guide)
    engine.seed(
        [
            WorkItem(ExplorationState(), si.edge, (si.lo, si.hi))
            for si in task.start
        ]
    )
    threads = [
        threading.Thread(target=engine.worker, name=f"spdireach-w{i}", daemon=True)
        for i in range(config.workers)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    engine.stats.idle_final = engine.idle
    stats = SolveStats(
        steps=engine.total_steps,
        accelerations=engine.total_accel,
        handoffs=engine.stats.handoffs,
        workers=config.workers,
        duration_s=time.perf_counter() - t0,
    )
    if engine.error is not None:
        if isinstance(engine.error, (SolveTimeout, SolveLimitExceeded)):
            raise engine.error
        raise EngineError(f"worker failed: {engine.error!r}") from engine.error
    if engine.witness is not None:
        return ReachResult(REACHABLE, engine.witness, stats)
    return ReachResult(UNREACHABLE, None, stats)


def solve(
    spdi: Spdi,
    task: ReachTask,
    workers: int = 1,
    *,
    max_steps: int = MAX_SOLVE_STEPS,
    timeout_s: Optional[float] = None,
) -> ReachResult:
    """Convenience wrapper choosing the engine by worker count."""
    from .explorer import solve_sequential

    if workers <= 1:
        return solve_sequential(spdi, task, max_steps=max_steps, timeout_s=timeout_s)
    return solve_parallel(
        spdi, task, EngineConfig(workers=workers), max_steps=max_steps, timeout_s=timeout_s
    )
