"""Depth-first signature exploration with cycle acceleration.

The search walks edge-to-edge successors depth first.  Each path may visit
an edge once; a revisit inside the current path closes a cycle, which is
accelerated in one shot (classified and swept) instead of being unrolled.
Exploration then continues from the swept intervals of the cycle's edges,
and a marker forbids later closures that would reach back past the cycle,
so every explored signature stays in the path/cycle alternation the theory
allows.  Everything is iterative; no Python recursion.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional, Union

from .cycles import CycleOutcome, test_cycle_and_get_final_images
from .geometry import EPS
from .model import EdgeInterval, ModelError, ReachTask, Spdi, validate_task
from .successor import _preimage, merge_intervals, succ_affine, succ_interval

MAX_SOLVE_STEPS = 10_000_000

REACHABLE = "REACHABLE"
UNREACHABLE = "UNREACHABLE"


class SolveLimitExceeded(RuntimeError):
    """The exploration step cap was hit."""


class SolveTimeout(RuntimeError):
    """The solve deadline expired."""


class ReplayError(AssertionError):
    """A witness failed to replay."""


class _Aborted(Exception):
    """Internal: exploration cancelled by the controller."""


@dataclass(frozen=True)
class WitnessStep:
    edge: str
    interval: tuple[float, float]


@dataclass(frozen=True)
class WitnessCycle:
    edges: tuple[str, ...]
    ctype: str
    entry: tuple[float, float]
    swept: tuple[tuple[str, tuple[float, float]], ...]


@dataclass(frozen=True)
class Witness:
    steps: tuple[Union[WitnessStep, WitnessCycle], ...]
    hit: EdgeInterval


@dataclass
class SolveStats:
    steps: int = 0
    accelerations: int = 0
    handoffs: int = 0
    workers: int = 1
    duration_s: float = 0.0


@dataclass(frozen=True)
class ReachResult:
    verdict: str
    witness: Optional[Witness]
    stats: SolveStats

    @property
    def reachable(self) -> bool:
        return self.verdict == REACHABLE


_EDGE = "edge"
_CYCLE = "cycle"


class ExplorationState:
    """Path stack, per-path visited map, and accepted-cycle bookkeeping."""

    __slots__ = ("stack", "visited", "visited_cycles", "mark")

    def __init__(self) -> None:
        self.stack: list[tuple] = []
        self.visited: dict[str, int] = {}
        self.visited_cycles: set[frozenset[str]] = set()
        self.mark = 0

    def clone(self) -> "ExplorationState":
        other = ExplorationState()
        other.stack = list(self.stack)
        other.visited = dict(self.visited)
        other.visited_cycles = set(self.visited_cycles)
        other.mark = self.mark
        return other


def restore_cycle(state: ExplorationState, edge: str) -> list[str]:
    """Edges of the cycle closed by revisiting ``edge``, in path order."""
    pos = state.visited[edge]
    return [item[1] for item in state.stack[pos:] if item[0] == _EDGE]


def _final_hit(
    final_by_edge: dict[str, list[tuple[float, float]]],
    edge: str,
    iv: tuple[float, float],
) -> Optional[EdgeInterval]:
    for flo, fhi in final_by_edge.get(edge, ()):
        lo, hi = max(iv[0], flo), min(iv[1], fhi)
        if lo <= hi:
            return EdgeInterval(edge, lo, hi)
    return None


def _witness_from_stack(stack: list[tuple], hit: EdgeInterval) -> Witness:
    steps: list[Union[WitnessStep, WitnessCycle]] = []
    for item in stack:
        if item[0] == _EDGE:
            steps.append(WitnessStep(item[1], item[2]))
        else:
            outcome: CycleOutcome = item[1]
            entry: tuple[float, float] = item[2]
            swept = tuple(
                (edge, piece) for edge, pieces in outcome.swept_by_edge for piece in pieces
            )
            steps.append(
                WitnessCycle(outcome.edges, outcome.analysis.ctype.value, entry, swept)
            )
    return Witness(tuple(steps), hit)


class _Frame:
    __slots__ = ("children", "idx", "pushed_cycle")

    def __init__(self, children: list[tuple[str, tuple[float, float]]], pushed_cycle: bool):
        self.children = children
        self.idx = 0
        self.pushed_cycle = pushed_cycle


def hop_ranks(
    spdi: Spdi, final_by_edge: dict[str, list[tuple[float, float]]]
) -> dict[str, int]:
    """Hop count from each edge to the nearest final edge, ignoring flow.

    Children are explored in ascending rank, so the search leans toward the
    final set before it wanders.  Edges with no route to a final edge are
    absent and sort last.  The map depends only on the model and the final
    set, so every solver route orders children identically.
    """
    rev: dict[str, list[str]] = {}
    for e in spdi.edges:
        for _region, e_out in spdi.next_hops(e.id):
            rev.setdefault(e_out, []).append(e.id)
    dist = {e: 0 for e in final_by_edge}
    queue = deque(final_by_edge)
    while queue:
        e = queue.popleft()
        for prev in rev.get(e, ()):
            if prev not in dist:
                dist[prev] = dist[e] + 1
                queue.append(prev)
    return dist


@dataclass(frozen=True)
class SearchGuide:
    """Per-task search aids: child ordering plus a sound viability filter.

    ``coreach`` overapproximates, per edge, the coordinates from which the
    final set can still be reached; a child interval that misses it can be
    dropped without losing any witness.  None means the overapproximation
    was not available and only the ordering applies.
    """

    rank: dict[str, int]
    coreach: Optional[dict[str, list[tuple[float, float]]]]


def _overlaps_any(iv: tuple[float, float], pieces: list[tuple[float, float]]) -> bool:
    lo, hi = iv
    for plo, phi in pieces:
        if plo > hi:
            return False
        if phi >= lo:
            return True
    return False


def make_search_guide(
    spdi: Spdi, final_by_edge: dict[str, list[tuple[float, float]]]
) -> SearchGuide:
    return SearchGuide(
        rank=hop_ranks(spdi, final_by_edge),
        coreach=backward_closure(spdi, final_by_edge),
    )


def coreach_excludes(guide: SearchGuide, task: ReachTask) -> bool:
    """Every start part misses the co-reach set: unreachable without search."""
    if guide.coreach is None:
        return False
    return not any(
        _overlaps_any((si.lo, si.hi), guide.coreach.get(si.edge, []))
        for si in task.start
    )


def _candidates(
    spdi: Spdi,
    edge: str,
    iv: tuple[float, float],
    guide: Optional[SearchGuide] = None,
) -> list[tuple[str, tuple[float, float]]]:
    out = []
    coreach = None if guide is None else guide.coreach
    for region_id, e_out in spdi.next_hops(edge):
        img = succ_interval(spdi, region_id, edge, e_out, iv)
        if img is None:
            continue
        if coreach is not None:
            pieces = coreach.get(e_out)
            if not pieces or not _overlaps_any(img, pieces):
                continue
        out.append((e_out, img))
    if guide is not None and len(out) >= 2:
        rank = guide.rank
        big = len(rank) + 1
        out.sort(key=lambda child: rank.get(child[0], big))
    return out


def signatures_exploration(
    spdi: Spdi,
    final_by_edge: dict[str, list[tuple[float, float]]],
    state: ExplorationState,
    edge: str,
    interval: tuple[float, float],
    stats: SolveStats,
    control: Optional[Callable[[SolveStats], None]] = None,
    on_branch: Optional[Callable[[ExplorationState, list], list]] = None,
    guide: Optional[SearchGuide] = None,
) -> Optional[Witness]:
    """Explore all admissible signatures from one entry, depth first.

    Returns a witness for the first final hit, or None when the subtree is
    exhausted.  ``control`` runs once per step and may raise to cancel;
    ``on_branch`` may divert all but one child of a branch point elsewhere.
    """
    if guide is None:
        guide = make_search_guide(spdi, final_by_edge)
    if guide.coreach is not None:
        # The final set seeds the co-reach map, so a pruned entry cannot be
        # hiding a direct hit.
        pieces = guide.coreach.get(edge)
        if not pieces or not _overlaps_any(interval, pieces):
            return None

    def enter(e: str, iv: tuple[float, float]):
        stats.steps += 1
        if control is not None:
            control(stats)
        hit = _final_hit(final_by_edge, e, iv)
        pos = state.visited.get(e)
        if pos is None:
            if hit is not None:
                state.stack.append((_EDGE, e, iv))
                return _witness_from_stack(state.stack, hit)
            state.visited[e] = len(state.stack)
            state.stack.append((_EDGE, e, iv))
            children = _candidates(spdi, e, iv, guide)
            if on_branch is not None and len(children) >= 2:
                children = on_branch(state, children)
            return _Frame(children, pushed_cycle=False)
        # Hitting the final on a revisit is already covered by the sweep of
        # the cycle about to be accelerated, but the direct check is cheap.
        if hit is not None:
            state.stack.append((_EDGE, e, iv))
            return _witness_from_stack(state.stack, hit)
        if pos < state.mark:
            return None
        cyc = restore_cycle(state, e)
        key = frozenset(cyc)
        if key in state.visited_cycles:
            return None
        stats.accelerations += 1
        outcome = test_cycle_and_get_final_images(spdi, cyc, iv, final_by_edge)
        if outcome.hit is not None:
            state.stack.append((_CYCLE, outcome, iv, state.mark, key))
            return _witness_from_stack(state.stack, outcome.hit)
        state.visited_cycles.add(key)
        old_mark = state.mark
        state.stack.append((_CYCLE, outcome, iv, old_mark, key))
        state.mark = len(state.stack)
        children = []
        for img in outcome.images:
            children.extend(_candidates(spdi, img.edge, (img.lo, img.hi), guide))
        big = len(guide.rank) + 1
        children.sort(key=lambda child: guide.rank.get(child[0], big))
        if on_branch is not None and len(children) >= 2:
            children = on_branch(state, children)
        return _Frame(children, pushed_cycle=True)

    def undo(frame: _Frame) -> None:
        item = state.stack.pop()
        if frame.pushed_cycle:
            state.mark = item[3]
            state.visited_cycles.discard(item[4])
        else:
            del state.visited[item[1]]

    opened = enter(edge, interval)
    if opened is None:
        return None
    if isinstance(opened, Witness):
        return opened
    frames = [opened]
    while frames:
        fr = frames[-1]
        if fr.idx < len(fr.children):
            child_edge, child_iv = fr.children[fr.idx]
            fr.idx += 1
            got = enter(child_edge, child_iv)
            if got is None:
                continue
            if isinstance(got, Witness):
                return got
            frames.append(got)
        else:
            undo(fr)
            frames.pop()
    return None


def final_intervals_by_edge(task: ReachTask) -> dict[str, list[tuple[float, float]]]:
    out: dict[str, list[tuple[float, float]]] = {}
    for fi in task.final:
        out.setdefault(fi.edge, []).append((fi.lo, fi.hi))
    return out


def immediate_overlap(task: ReachTask) -> Optional[Witness]:
    """Start and final touching on the same edge: success with no signature."""
    final_by_edge = final_intervals_by_edge(task)
    for si in task.start:
        hit = _final_hit(final_by_edge, si.edge, (si.lo, si.hi))
        if hit is not None:
            return Witness((), hit)
    return None


# Growth events allowed per edge before its coverage is widened to the hull,
# then to the whole edge; the caps force the closure loop to terminate.
_CLOSURE_EXACT_UPDATES = 24
_CLOSURE_HULL_UPDATES = 8
_CLOSURE_POST_BUDGET = 200_000
_CLOSURE_MARGIN = 1e-7
# Coverage growth below the atom is merged in but not propagated or counted,
# so a slowly converging cycle cannot burn the widening budget.  Contracting
# dynamics keep the lost mass under the atom, far inside the margin, while
# expanding dynamics amplify the covered mass alongside and force widening.
_CLOSURE_ATOM = 1e-9


def _uncovered(
    iv: tuple[float, float], pieces: list[tuple[float, float]]
) -> list[tuple[float, float]]:
    """Positive-width parts of ``iv`` outside a sorted disjoint union."""
    lo, hi = iv
    out: list[tuple[float, float]] = []
    for plo, phi in pieces:
        if phi < lo:
            continue
        if plo > hi:
            break
        if plo > lo:
            out.append((lo, plo))
        lo = max(lo, phi)
        if lo >= hi:
            break
    if lo < hi:
        out.append((lo, hi))
    return out


def forward_closure(spdi: Spdi, task: ReachTask) -> bool:
    """Saturate one-step images; True certifies the final set is unreachable.

    Per-edge coverage only ever grows, and after a budget of growth events it
    is widened (first to its hull, then to the whole edge), so the worklist
    always drains.  Widening and the merge slack only enlarge coverage, hence
    a closure that stays clear of every final interval by a safety margin is
    a proof of unreachability.  Anything else, including any touch within the
    margin, is inconclusive and the caller falls back to the signature
    search.  Enumerating signatures can be exponential in the partition size
    while this pass is near linear, so it runs first on every solve.
    """
    final_by_edge = final_intervals_by_edge(task)
    reached: dict[str, list[tuple[float, float]]] = {}
    updates: dict[str, int] = {}
    work: deque[tuple[str, tuple[float, float]]] = deque()
    posts = 0

    def post(e: str, iv: tuple[float, float]) -> bool:
        nonlocal posts
        cur = reached.get(e, [])
        fresh = _uncovered(iv, cur)
        if not fresh:
            return True
        posts += 1
        if posts > _CLOSURE_POST_BUDGET:
            return False
        if any(hi - lo > _CLOSURE_ATOM for lo, hi in fresh):
            n = updates.get(e, 0) + 1
            updates[e] = n
        else:
            n = updates.get(e, 0)
        if n > _CLOSURE_EXACT_UPDATES + _CLOSURE_HULL_UPDATES:
            cover = [(0.0, 1.0)]
        elif n > _CLOSURE_EXACT_UPDATES:
            grown = cur + [iv]
            cover = [(min(p[0] for p in grown), max(p[1] for p in grown))]
        else:
            cover = merge_intervals(cur + [iv])
        added = [d for piece in cover for d in _uncovered(piece, cur)]
        reached[e] = cover
        for flo, fhi in final_by_edge.get(e, ()):
            for dlo, dhi in added:
                if dlo <= fhi + _CLOSURE_MARGIN and flo - _CLOSURE_MARGIN <= dhi:
                    return False
        work.extend((e, piece) for piece in added if piece[1] - piece[0] > _CLOSURE_ATOM)
        return True

    for si in task.start:
        if not post(si.edge, (si.lo, si.hi)):
            return False
    while work:
        e, iv = work.popleft()
        for region_id, e_out in spdi.next_hops(e):
            img = succ_interval(spdi, region_id, e, e_out, iv)
            if img is not None and not post(e_out, img):
                return False
    return True


def _pre_hop(
    spdi: Spdi, region_id: str, e_in: str, e_out: str, target: tuple[float, float]
) -> Optional[tuple[float, float]]:
    """Entry coordinates on e_in whose one-step image can meet ``target``.

    The endpoint maps are pointwise ordered on their shared domain, so the
    condition is L(x) <= hi and U(x) >= lo; the result is padded outward by
    EPS to keep the backward closure an overapproximation under rounding.
    """
    m = succ_affine(spdi, region_id, e_in, e_out)
    dom = m.dom
    if dom is None or dom[0] > dom[1]:
        return None
    low_ok = _preimage(m.L, (-math.inf, target[1]))
    high_ok = _preimage(m.U, (target[0], math.inf))
    lo = max(dom[0], low_ok[0], high_ok[0])
    hi = min(dom[1], low_ok[1], high_ok[1])
    if lo > hi:
        return None
    return (max(0.0, lo - EPS), min(1.0, hi + EPS))


def backward_closure(
    spdi: Spdi, final_by_edge: dict[str, list[tuple[float, float]]]
) -> Optional[dict[str, list[tuple[float, float]]]]:
    """Overapproximate, per edge, the coordinates that can reach the final set.

    The dual of forward_closure: coverage starts on the final intervals and
    grows through one-step preimages, with the same widening ladder and the
    same growth atom, so it terminates.  Returns None if the post budget is
    exhausted, since a partially saturated map must not be used to prune.
    """
    rev: dict[str, list[tuple[str, str]]] = {}
    for e in spdi.edges:
        for region_id, e_out in spdi.next_hops(e.id):
            rev.setdefault(e_out, []).append((region_id, e.id))
    reached: dict[str, list[tuple[float, float]]] = {}
    updates: dict[str, int] = {}
    work: deque[tuple[str, tuple[float, float]]] = deque()
    posts = 0

    def post(e: str, iv: tuple[float, float]) -> bool:
        nonlocal posts
        cur = reached.get(e, [])
        fresh = _uncovered(iv, cur)
        if not fresh:
            return True
        posts += 1
        if posts > _CLOSURE_POST_BUDGET:
            return False
        if any(hi - lo > _CLOSURE_ATOM for lo, hi in fresh):
            n = updates.get(e, 0) + 1
            updates[e] = n
        else:
            n = updates.get(e, 0)
        if n > _CLOSURE_EXACT_UPDATES + _CLOSURE_HULL_UPDATES:
            cover = [(0.0, 1.0)]
        elif n > _CLOSURE_EXACT_UPDATES:
            grown = cur + [iv]
            cover = [(min(p[0] for p in grown), max(p[1] for p in grown))]
        else:
            cover = merge_intervals(cur + [iv])
        added = [d for piece in cover for d in _uncovered(piece, cur)]
        reached[e] = cover
        work.extend((e, piece) for piece in added if piece[1] - piece[0] > _CLOSURE_ATOM)
        return True

    for e, pieces in final_by_edge.items():
        for piece in pieces:
            if not post(e, piece):
                return None
    while work:
        e, iv = work.popleft()
        for region_id, e_in in rev.get(e, ()):
            pre = _pre_hop(spdi, region_id, e_in, e, iv)
            if pre is not None and not post(e_in, pre):
                return None
    return reached


def make_control(
    max_steps: int = MAX_SOLVE_STEPS, deadline: Optional[float] = None
) -> Callable[[SolveStats], None]:
    def control(stats: SolveStats) -> None:
        if stats.steps > max_steps:
            raise SolveLimitExceeded(f"exceeded {max_steps} exploration steps")
        if deadline is not None and stats.steps % 64 == 0 and time.monotonic() > deadline:
            raise SolveTimeout("solve deadline expired")

    return control


def solve_sequential(
    spdi: Spdi,
    task: ReachTask,
    *,
    max_steps: int = MAX_SOLVE_STEPS,
    timeout_s: Optional[float] = None,
) -> ReachResult:
    """Decide reachability: closure pre-pass, then start parts in task order."""
    errors = validate_task(spdi, task)
    if errors:
        raise ModelError("; ".join(errors))
    t0 = time.perf_counter()
    stats = SolveStats()
    quick = immediate_overlap(task)
    if quick is not None:
        stats.duration_s = time.perf_counter() - t0
        return ReachResult(REACHABLE, quick, stats)
    if forward_closure(spdi, task):
        stats.duration_s = time.perf_counter() - t0
        return ReachResult(UNREACHABLE, None, stats)
    final_by_edge = final_intervals_by_edge(task)
    guide = make_search_guide(spdi, final_by_edge)
    if coreach_excludes(guide, task):
        stats.duration_s = time.perf_counter() - t0
        return ReachResult(UNREACHABLE, None, stats)
    deadline = None if timeout_s is None else time.monotonic() + timeout_s
    control = make_control(max_steps, deadline)
    for si in task.start:
        state = ExplorationState()
        witness = signatures_exploration(
            spdi, final_by_edge, state, si.edge, (si.lo, si.hi), stats, control, guide=guide
        )
        if witness is not None:
            stats.duration_s = time.perf_counter() - t0
            return ReachResult(REACHABLE, witness, stats)
    stats.duration_s = time.perf_counter() - t0
    return ReachResult(UNREACHABLE, None, stats)


def _step_regions(spdi: Spdi, e_in: str, e_out: str) -> list[str]:
    return [r for r, out in spdi.next_hops(e_in) if out == e_out]


def _replay_step(
    spdi: Spdi,
    prev_edge: str,
    prev_pieces: list[tuple[float, float]],
    edge: str,
) -> list[tuple[float, float]]:
    images = []
    for region_id in _step_regions(spdi, prev_edge, edge):
        for piece in prev_pieces:
            img = succ_interval(spdi, region_id, prev_edge, edge, piece)
            if img is not None:
                images.append(img)
    return merge_intervals(images)


def replay_witness(spdi: Spdi, task: ReachTask, witness: Witness) -> EdgeInterval:
    """Recompute a witness from scratch; raise ReplayError if it does not hold.

    Path steps are replayed with succ_interval; cycle segments are replayed
    with the brute-force iteration oracle, so a witness is confirmed by a
    route independent of the closed-form classifier that produced it.
    """
    from .cycles import iterate_cycle_oracle
    from .successor import compose_signature

    final_by_edge = final_intervals_by_edge(task)
    if not witness.steps:
        for si in task.start:
            if si.edge != witness.hit.edge:
                continue
            hit = _final_hit(final_by_edge, si.edge, (si.lo, si.hi))
            if hit is not None:
                return hit
        raise ReplayError("empty-signature witness has no start/final overlap")
    first = witness.steps[0]
    if not isinstance(first, WitnessStep):
        raise ReplayError("witness must begin with an edge step")
    starts = [s for s in task.start if s.edge == first.edge]
    if not starts:
        raise ReplayError(f"witness starts on {first.edge}, not a start edge")
    pieces = merge_intervals(
        [
            (max(s.lo, first.interval[0]), min(s.hi, first.interval[1]))
            for s in starts
            if max(s.lo, first.interval[0]) <= min(s.hi, first.interval[1])
        ]
    )
    if not pieces:
        raise ReplayError("witness first interval misses the start set")
    cur_edges: list[tuple[str, list[tuple[float, float]]]] = [(first.edge, pieces)]
    for step in witness.steps[1:]:
        if isinstance(step, WitnessStep):
            images = []
            for src_edge, src_pieces in cur_edges:
                images.extend(_replay_step(spdi, src_edge, src_pieces, step.edge))
            images = merge_intervals(images)
            if not images:
                raise ReplayError(f"empty successor replaying into {step.edge}")
            cur_edges = [(step.edge, images)]
        else:
            entry_pieces = []
            for src_edge, src_pieces in cur_edges:
                if src_edge == step.edges[0]:
                    entry_pieces.extend(src_pieces)
                else:
                    entry_pieces.extend(
                        _replay_step(spdi, src_edge, src_pieces, step.edges[0])
                    )
            entry_pieces = merge_intervals(entry_pieces)
            if not entry_pieces:
                raise ReplayError(f"empty entry replaying cycle at {step.edges[0]}")
            entry = (entry_pieces[0][0], entry_pieces[-1][1])
            loop = list(step.edges) + [step.edges[0]]
            im = compose_signature(spdi, loop)
            clipped = entry
            if im.dom is not None:
                clipped = (max(entry[0], im.dom[0]), min(entry[1], im.dom[1]))
            if clipped[0] <= clipped[1]:
                oracle = iterate_cycle_oracle(im, clipped)
                swept = list(oracle.swept) if oracle.swept else list(oracle.trace)
            else:
                swept = []
            pieces0 = merge_intervals([entry, *swept])
            from .successor import signature_steps

            chain = signature_steps(spdi, loop)
            per_edge = [(step.edges[0], pieces0)]
            rolling = pieces0
            for region_id, e_in, e_out in chain[:-1]:
                rolling = merge_intervals(
                    [
                        img
                        for piece in rolling
                        if (img := succ_interval(spdi, region_id, e_in, e_out, piece))
                        is not None
                    ]
                )
                per_edge.append((e_out, rolling))
            cur_edges = per_edge
    hits = []
    for edge, edge_pieces in cur_edges:
        for piece in edge_pieces:
            got = _final_hit(final_by_edge, edge, piece)
            if got is not None:
                hits.append(got)
    for got in hits:
        if got.edge == witness.hit.edge:
            return got
    if hits:
        return hits[0]
    raise ReplayError("replayed witness does not intersect the final set")
