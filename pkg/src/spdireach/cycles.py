"""Cycle classification and acceleration.

A closed edge sequence induces a one-lap interval map on its first edge.
Iterating that map classifies the long-run behaviour of the trajectory tube:
it settles inside the edge (STAY), drifts off one or both ends (EXIT_*), or
pinches to nothing (DIE).  The classifier reads limits off the affine
endpoint maps in closed form and only iterates to pin down event ordering;
the brute-force oracle knows nothing about the closed forms and just runs
the maps, so the two stay independent checks of each other.

Both deliberately step endpoints with the same ``a*x + b`` float expression
so that event counts (escape step, emptiness step) agree bit-for-bit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Optional

from .model import EdgeInterval, Spdi
from .successor import (
    IntervalMap,
    SignatureError,
    compose_signature,
    merge_intervals,
    signature_steps,
    succ_interval,
)

MAX_CYCLE_ITER = 100_000


class CycleOrientationError(ValueError):
    """Endpoint maps of a cycle must have positive slope."""


class CycleType(enum.Enum):
    STAY = "STAY"
    EXIT_LEFT = "EXIT_LEFT"
    EXIT_RIGHT = "EXIT_RIGHT"
    EXIT_BOTH = "EXIT_BOTH"
    DIE = "DIE"


@dataclass(frozen=True)
class EndpointFate:
    """Limit of iterating x -> a*x + b from x0, and initial drift direction."""

    limit: float
    direction: int


def endpoint_limit(a: float, b: float, x0: float) -> EndpointFate:
    if a <= 0:
        raise CycleOrientationError(f"endpoint map slope must be positive, got {a}")
    step = a * x0 + b
    direction = 0 if step == x0 else (1 if step > x0 else -1)
    if a < 1.0:
        return EndpointFate(b / (1.0 - a), direction)
    if a == 1.0:
        if b == 0.0:
            return EndpointFate(x0, 0)
        return EndpointFate(math.inf if b > 0 else -math.inf, direction)
    fix = b / (1.0 - a)
    if x0 == fix:
        return EndpointFate(x0, 0)
    return EndpointFate(math.inf if x0 > fix else -math.inf, direction)


@dataclass(frozen=True)
class CycleAnalysis:
    ctype: CycleType
    swept: tuple[tuple[float, float], ...]
    iterations_used: int
    limits: tuple[float, float]


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def classify_cycle(
    im: IntervalMap, entry: tuple[float, float], max_iter: int = MAX_CYCLE_ITER
) -> CycleAnalysis:
    """Classify the long-run behaviour of iterating an interval map.

    Escape is decided from the closed-form endpoint limits; iteration is
    used only to order an escape event against interval emptiness, and a
    tie goes to the escape.
    """
    L, U = im.L, im.U
    lo, hi = entry
    lim_l = endpoint_limit(L.a, L.b, lo).limit
    lim_u = endpoint_limit(U.a, U.b, hi).limit
    esc_l = lim_l < 0.0
    esc_r = lim_u > 1.0
    limits = (lim_l, lim_u)
    span = (min(lo, _clamp01(lim_l)), max(hi, _clamp01(lim_u)))
    if esc_l or esc_r:
        if esc_l and esc_r:
            ctype = CycleType.EXIT_BOTH
        else:
            ctype = CycleType.EXIT_LEFT if esc_l else CycleType.EXIT_RIGHT
        pieces = [(lo, hi)]
        lp, up = lo, hi
        lc, uc = lo, hi
        k = 0
        while k < max_iter:
            k += 1
            new_lp = L.a * lp + L.b
            new_up = U.a * up + U.b
            stagnant = new_lp == lp and new_up == up
            lp, up = new_lp, new_up
            lraw = L.a * lc + L.b
            uraw = U.a * uc + U.b
            lc = lraw if lraw > 0.0 else 0.0
            uc = uraw if uraw < 1.0 else 1.0
            if lp < 0.0 or up > 1.0:
                return CycleAnalysis(ctype, (span,), k, limits)
            if lc > uc:
                return CycleAnalysis(
                    CycleType.DIE, tuple(merge_intervals(pieces)), k, limits
                )
            pieces.append((lc, uc))
            if stagnant:
                break
        # Escape was predicted but the float iteration never realized it:
        # the limit only grazes the boundary within rounding, so report the
        # behaviour the iterates actually show.
        if (
            math.isfinite(lim_l)
            and math.isfinite(lim_u)
            and lim_l > -1e-9
            and lim_u < 1.0 + 1e-9
        ):
            return CycleAnalysis(CycleType.STAY, (span,), k, limits)
        return CycleAnalysis(ctype, (span,), k, limits)
    if lim_l > lim_u:
        pieces = [(lo, hi)]
        lc, uc = lo, hi
        k = 0
        while k < max_iter:
            k += 1
            lraw = L.a * lc + L.b
            uraw = U.a * uc + U.b
            lc = lraw if lraw > 0.0 else 0.0
            uc = uraw if uraw < 1.0 else 1.0
            if lc > uc:
                break
            pieces.append((lc, uc))
        return CycleAnalysis(CycleType.DIE, tuple(merge_intervals(pieces)), k, limits)
    return CycleAnalysis(CycleType.STAY, (span,), 0, limits)


@dataclass(frozen=True)
class CycleOracleResult:
    ctype: Optional[CycleType]
    trace: tuple[tuple[float, float], ...]
    iterations: int
    nonterminated: bool
    swept: tuple[tuple[float, float], ...]
    limits: tuple[float, float]


def _extrapolate(x: float, delta: float, prev_delta: Optional[float]) -> float:
    # Geometric-tail estimate of the remaining distance to the limit; for a
    # contraction the delta ratio approximates the slope.
    if delta == 0.0 or prev_delta in (None, 0.0):
        return x
    ratio = delta / prev_delta
    if not (1e-12 < ratio < 1.0 - 1e-12):
        return x
    return x + delta * ratio / (1.0 - ratio)


def iterate_cycle_oracle(
    im: IntervalMap,
    entry: tuple[float, float],
    max_iter: int = MAX_CYCLE_ITER,
    eps: float = 1e-9,
) -> CycleOracleResult:
    """Brute-force iteration of an interval map, with no closed-form help."""
    L, U = im.L, im.U
    lo, hi = entry
    trace = [(lo, hi)]
    lp, up = lo, hi
    lc, uc = lo, hi
    prev_dl: Optional[float] = None
    prev_du: Optional[float] = None
    k = 0
    while k < max_iter:
        k += 1
        new_lp = L.a * lp + L.b
        new_up = U.a * up + U.b
        dl, du = new_lp - lp, new_up - up
        lp, up = new_lp, new_up
        lraw = L.a * lc + L.b
        uraw = U.a * uc + U.b
        lc2 = lraw if lraw > 0.0 else 0.0
        uc2 = uraw if uraw < 1.0 else 1.0
        if lp < 0.0 or up > 1.0:
            return _oracle_escape(
                im, entry, lp, up, dl, du, prev_dl, prev_du, k, max_iter, eps, trace
            )
        if lc2 > uc2:
            swept = tuple(merge_intervals(trace))
            return CycleOracleResult(
                CycleType.DIE, tuple(trace), k, False, swept, (lp, up)
            )
        lc, uc = lc2, uc2
        trace.append((lc, uc))
        if abs(dl) < eps and abs(du) < eps:
            lim_l = _extrapolate(lp, dl, prev_dl)
            lim_u = _extrapolate(up, du, prev_du)
            swept = (min(lo, _clamp01(lim_l)), max(hi, _clamp01(lim_u)))
            return CycleOracleResult(
                CycleType.STAY, tuple(trace), k, False, (swept,), (lim_l, lim_u)
            )
        prev_dl, prev_du = dl, du
    return CycleOracleResult(None, tuple(trace), max_iter, True, (), (lp, up))


def _oracle_escape(im, entry, lp, up, dl, du, prev_dl, prev_du, k, max_iter, eps, trace):
    L, U = im.L, im.U
    lo, hi = entry
    esc_l = lp < 0.0
    esc_r = up > 1.0
    lim_l = -math.inf if esc_l else lp
    lim_u = math.inf if esc_r else up
    # Follow the other endpoint until it escapes too or settles.
    while not (esc_l and esc_r) and k < max_iter:
        k += 1
        if not esc_l:
            new_lp = L.a * lp + L.b
            dl, prev_dl = new_lp - lp, dl
            lp = new_lp
            if lp < 0.0:
                esc_l, lim_l = True, -math.inf
            elif abs(dl) < eps:
                lim_l = _extrapolate(lp, dl, prev_dl)
                break
        else:
            new_up = U.a * up + U.b
            du, prev_du = new_up - up, du
            up = new_up
            if up > 1.0:
                esc_r, lim_u = True, math.inf
            elif abs(du) < eps:
                lim_u = _extrapolate(up, du, prev_du)
                break
    else:
        if not (esc_l and esc_r):
            return CycleOracleResult(None, tuple(trace), max_iter, True, (), (lp, up))
    if esc_l and esc_r:
        ctype = CycleType.EXIT_BOTH
    else:
        ctype = CycleType.EXIT_LEFT if esc_l else CycleType.EXIT_RIGHT
    swept = (min(lo, _clamp01(lim_l)), max(hi, _clamp01(lim_u)))
    return CycleOracleResult(ctype, tuple(trace), k, False, (swept,), (lim_l, lim_u))


@dataclass(frozen=True)
class CycleOutcome:
    edges: tuple[str, ...]
    analysis: CycleAnalysis
    swept_by_edge: tuple[tuple[str, tuple[tuple[float, float], ...]], ...]
    hit: Optional[EdgeInterval]
    images: tuple[EdgeInterval, ...]


def test_cycle_and_get_final_images(
    spdi: Spdi,
    cycle: list[str],
    entry: tuple[float, float],
    final_by_edge: Mapping[str, list[tuple[float, float]]],
    max_iter: int = MAX_CYCLE_ITER,
) -> CycleOutcome:
    """Accelerate one cycle: classify it, sweep every cycle edge, find a hit.

    The swept band of the first edge is propagated stepwise to every other
    cycle edge; the hit is the first overlap of any per-edge swept piece
    with a final interval on that edge, scanning edges in cycle order.  Each
    per-edge swept piece is also reported as a continuation image so that
    exploration can leave the cycle through any of its crossing regions.
    """
    if not cycle:
        raise SignatureError("empty cycle")
    steps = signature_steps(spdi, cycle + [cycle[0]])
    im = compose_signature(spdi, cycle + [cycle[0]])
    lo, hi = entry
    clipped = entry
    if im.dom is not None:
        d0, d1 = im.dom
        clipped = (max(lo, d0), min(hi, d1))
    if clipped[0] <= clipped[1]:
        analysis = classify_cycle(im, clipped, max_iter)
    else:
        # Entry lies outside the one-lap domain: trajectories leave through
        # vertices mid-lap, so only the entry itself is known swept.
        analysis = CycleAnalysis(CycleType.DIE, ((lo, hi),), 0, (lo, hi))
    pieces = merge_intervals([(lo, hi), *analysis.swept])
    swept_by_edge: list[tuple[str, tuple[tuple[float, float], ...]]] = [
        (cycle[0], tuple(pieces))
    ]
    for region_id, e_in, e_out in steps[:-1]:
        nxt = [
            img
            for piece in pieces
            if (img := succ_interval(spdi, region_id, e_in, e_out, piece)) is not None
        ]
        pieces = merge_intervals(nxt)
        swept_by_edge.append((e_out, tuple(pieces)))
    hit: Optional[EdgeInterval] = None
    for edge, edge_pieces in swept_by_edge:
        for flo, fhi in final_by_edge.get(edge, ()):
            for plo, phi in edge_pieces:
                ilo, ihi = max(flo, plo), min(fhi, phi)
                if ilo <= ihi:
                    hit = EdgeInterval(edge, ilo, ihi)
                    break
            if hit is not None:
                break
        if hit is not None:
            break
    images = tuple(
        EdgeInterval(edge, plo, phi)
        for edge, edge_pieces in swept_by_edge
        for plo, phi in edge_pieces
    )
    return CycleOutcome(tuple(cycle), analysis, tuple(swept_by_edge), hit, images)
