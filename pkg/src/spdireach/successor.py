"""Point, interval, and signature successors between region edges.

The projection of an edge point along a fixed vector onto another edge's
support line is affine in the edge coordinate.  All successor machinery is
built from cached per-(region, entry edge, exit edge, vector) projections.

A projection records where the ray leaves the region relative to the exit
edge even when it never crosses that edge's line going forward: such rays
contribute an infinite effective coordinate on the side (before coordinate 0
or past coordinate 1) where the trajectory fan actually leaves.  Taking
min/max over the effective coordinates of both endpoints under both cone
vectors and clamping to [0, 1] then yields the exact swept sub-interval,
including the cases where the fan is truncated at a vertex of the exit edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .geometry import (
    EPS,
    DegenerateOverlap,
    Segment,
    Vector2,
    cross,
    dot,
    in_cone,
    normalize,
    ray_segment_param,
    sub,
)
from .model import ModelError, Spdi, point_at

INF = math.inf


class SignatureError(ModelError):
    """Edge sequence does not cross shared regions consecutively."""


@dataclass(frozen=True)
class AffineMap1:
    """One-dimensional affine map a*x + b, optionally domain-restricted.

    ``dom`` is the sub-interval of [0, 1] where the underlying geometric
    projection is defined; None means unrestricted.
    """

    a: float
    b: float
    dom: Optional[tuple[float, float]] = None

    def __call__(self, x: float) -> float:
        return self.a * x + self.b


@dataclass(frozen=True)
class IntervalMap:
    """Pair of affine endpoint maps describing an interval successor."""

    L: AffineMap1
    U: AffineMap1

    @property
    def dom(self) -> Optional[tuple[float, float]]:
        return self.L.dom

    def apply(self, iv: tuple[float, float]) -> Optional[tuple[float, float]]:
        """Clamped image of [lo, hi].

        Evaluates both maps at both endpoints, so the result is correct for
        negative-slope single steps as well; for positive slopes it reduces
        to [max(0, L(lo)), min(1, U(hi))].
        """
        lo, hi = iv
        if self.dom is not None:
            d0, d1 = self.dom
            if d0 > d1 or hi < d0 - EPS or lo > d1 + EPS:
                return None
            lo, hi = max(lo, d0), min(hi, d1)
        vals = (self.L(lo), self.L(hi), self.U(lo), self.U(hi))
        mn, mx = min(vals), max(vals)
        if mn > 1.0 or mx < 0.0:
            return None
        return (max(0.0, mn), min(1.0, mx))


_IDENTITY = IntervalMap(AffineMap1(1.0, 0.0, (0.0, 1.0)), AffineMap1(1.0, 0.0, (0.0, 1.0)))


@dataclass(frozen=True)
class _Projection:
    """Effective exit coordinate on e_out as a function of entry coordinate.

    u(lam) = ua*lam + ub on ``dom`` (where the ray crosses e_out's line
    forward); outside ``dom`` the ray leaves the region elsewhere and the
    effective coordinate is the constant ``oob`` (+inf or -inf, by which
    side of e_out the exit lies in boundary order).
    """

    ua: float
    ub: float
    dom: Optional[tuple[float, float]]
    oob: float

    def eff(self, lam: float) -> float:
        if self.dom is not None and self.dom[0] <= lam <= self.dom[1]:
            return self.ua * lam + self.ub
        return self.oob


def _boundary_positions(spdi: Spdi, region_id: str) -> dict[str, int]:
    return {eid: i for i, (eid, _) in enumerate(spdi.region_edges[region_id])}


def _oob_infinity(spdi: Spdi, region_id: str, e_out: str, ccw_after: bool) -> float:
    # Past the CCW end of e_out means past v1 when the region traverses the
    # edge forward, past v0 (coordinate 0) when it traverses it backward.
    forward = next(f for eid, f in spdi.region_edges[region_id] if eid == e_out)
    if ccw_after:
        return INF if forward else -INF
    return -INF if forward else INF


def _probe_exit_side(
    spdi: Spdi, region_id: str, e_in: str, e_out: str, d: Vector2, lam: float
) -> float:
    """Which side of e_out a non-crossing ray leaves the region on."""
    origin = point_at(spdi, e_in, lam)
    positions = _boundary_positions(spdi, region_id)
    k = len(positions)
    best_t = INF
    best_edge = None
    for eid, _ in spdi.region_edges[region_id]:
        if eid == e_in:
            continue
        p0, p1 = spdi.edge_points(eid)
        try:
            hit = ray_segment_param(origin, d, Segment(p0, p1))
        except DegenerateOverlap:
            continue
        if hit is not None and hit[0] < best_t:
            best_t = hit[0]
            best_edge = eid
    if best_edge is None or best_edge == e_out:
        # Numerical corner (ray grazing a vertex): fall back to the travel
        # direction along the edge axis, the continuous limit of the sweep.
        p0, p1 = spdi.edge_points(e_out)
        forward = next(f for eid, f in spdi.region_edges[region_id] if eid == e_out)
        e_ccw = sub(p1, p0) if forward else sub(p0, p1)
        ccw_after = dot(d, e_ccw) > 0
        return _oob_infinity(spdi, region_id, e_out, ccw_after)
    rel_exit = (positions[best_edge] - positions[e_in]) % k
    rel_out = (positions[e_out] - positions[e_in]) % k
    return _oob_infinity(spdi, region_id, e_out, ccw_after=rel_exit > rel_out)


def _build_projection(
    spdi: Spdi, region_id: str, e_in: str, e_out: str, d: Vector2
) -> _Projection:
    d = normalize(d)
    a_in, b_in = spdi.edge_points(e_in)
    a_out, b_out = spdi.edge_points(e_out)
    e = sub(b_in, a_in)
    big_e = sub(b_out, a_out)
    w0 = sub(a_in, a_out)
    denom = cross(big_e, d)
    if abs(denom) <= EPS * math.hypot(*big_e):
        # Ray parallel to the exit edge's line: never crosses it.
        side = _probe_exit_side(spdi, region_id, e_in, e_out, d, 0.5)
        return _Projection(0.0, 0.0, None, side)
    ua = cross(e, d) / denom
    ub = cross(w0, d) / denom
    ta = cross(e, big_e) / denom
    tb = cross(w0, big_e) / denom
    # Forward domain: lam with t(lam) >= -eps, intersected with [0, 1].
    eps_t = EPS * max(1.0, math.hypot(*big_e), math.hypot(*e))
    if abs(ta) <= EPS:
        dom = (0.0, 1.0) if tb >= -eps_t else None
    else:
        bound = (-eps_t - tb) / ta
        dom = (max(0.0, bound), 1.0) if ta > 0 else (0.0, min(1.0, bound))
        if dom[0] > dom[1]:
            dom = None
    oob = 0.0
    if dom is None or dom != (0.0, 1.0):
        if dom is None:
            sample = 0.5
        elif dom[0] > 0.0:
            sample = dom[0] / 2.0
        else:
            sample = (dom[1] + 1.0) / 2.0
        oob = _probe_exit_side(spdi, region_id, e_in, e_out, d, sample)
    return _Projection(ua, ub, dom, oob)


def _projections(spdi: Spdi, region_id: str, e_in: str, e_out: str) -> tuple[_Projection, ...]:
    key = ("proj", region_id, e_in, e_out)
    got = spdi._step_cache.get(key)
    if got is not None:
        return got
    region = spdi.regions_by_id[region_id]
    edge_ids = {eid for eid, _ in spdi.region_edges[region_id]}
    if e_in not in edge_ids or e_out not in edge_ids:
        raise ModelError(f"edges {e_in}, {e_out} must both bound region {region_id}")
    projs = [_build_projection(spdi, region_id, e_in, e_out, region.dyn_r)]
    if region.dyn_l != region.dyn_r:
        projs.append(_build_projection(spdi, region_id, e_in, e_out, region.dyn_l))
    got = tuple(projs)
    spdi._step_cache[key] = got
    return got


def succ_point(
    spdi: Spdi,
    region_id: str,
    e_in: str,
    e_out: str,
    c: Vector2,
    lam: float,
) -> Optional[float]:
    """Exit coordinate on e_out for the ray from point_at(e_in, lam) along c.

    None when the ray does not cross the e_out segment.  c must lie in the
    region's cone.
    """
    region = spdi.regions_by_id[region_id]
    if not in_cone(Vector2(*c), region.dyn_l, region.dyn_r):
        raise ModelError(f"vector {tuple(c)} outside the cone of region {region_id}")
    origin = point_at(spdi, e_in, lam)
    p0, p1 = spdi.edge_points(e_out)
    try:
        hit = ray_segment_param(origin, Vector2(*c), Segment(p0, p1))
    except DegenerateOverlap:
        return None
    if hit is None:
        return None
    return hit[1]


def succ_interval(
    spdi: Spdi,
    region_id: str,
    e_in: str,
    e_out: str,
    iv: tuple[float, float],
) -> Optional[tuple[float, float]]:
    """Exact interval successor of [lo, hi] from e_in to e_out across a region."""
    if e_in == e_out:
        return None
    lo, hi = iv
    cands = [p.eff(lam) for p in _projections(spdi, region_id, e_in, e_out) for lam in (lo, hi)]
    mn, mx = min(cands), max(cands)
    if mn > 1.0 or mx < 0.0:
        return None
    return (max(0.0, mn), min(1.0, mx))


def succ_affine(spdi: Spdi, region_id: str, e_in: str, e_out: str) -> IntervalMap:
    """Affine endpoint-map lift of succ_interval, domain-restricted to the
    coordinates where both cone projections cross e_out's line forward."""
    key = ("affine", region_id, e_in, e_out)
    got = spdi._step_cache.get(key)
    if got is not None:
        return got
    projs = _projections(spdi, region_id, e_in, e_out)
    dom: Optional[tuple[float, float]] = (0.0, 1.0)
    for p in projs:
        if p.dom is None:
            dom = None
            break
        dom = (max(dom[0], p.dom[0]), min(dom[1], p.dom[1]))
        if dom[0] > dom[1]:
            dom = None
            break
    if dom is None:
        empty = (1.0, 0.0)
        m = AffineMap1(1.0, 0.0, empty)
        got = IntervalMap(m, m)
    else:
        mid = (dom[0] + dom[1]) / 2.0
        lo_proj = min(projs, key=lambda p: p.ua * mid + p.ub)
        hi_proj = max(projs, key=lambda p: p.ua * mid + p.ub)
        got = IntervalMap(
            AffineMap1(lo_proj.ua, lo_proj.ub, dom),
            AffineMap1(hi_proj.ua, hi_proj.ub, dom),
        )
    spdi._step_cache[key] = got
    return got


def signature_steps(spdi: Spdi, sig: list[str]) -> list[tuple[str, str, str]]:
    """Resolve an edge sequence to (region, e_in, e_out) crossing steps."""
    steps = []
    for e_in, e_out in zip(sig, sig[1:]):
        for region_id, out in spdi.next_hops(e_in):
            if out == e_out:
                steps.append((region_id, e_in, e_out))
                break
        else:
            raise SignatureError(f"no region carries flow from {e_in} to {e_out}")
    return steps


def compose_signature(spdi: Spdi, sig: list[str]) -> IntervalMap:
    """Fold of succ_affine along an edge sequence; identity for single edges."""
    if not sig:
        raise SignatureError("empty signature")
    acc = _IDENTITY
    for region_id, e_in, e_out in signature_steps(spdi, sig):
        acc = _compose(acc, succ_affine(spdi, region_id, e_in, e_out))
    return acc


def _preimage(m: AffineMap1, iv: tuple[float, float]) -> tuple[float, float]:
    if abs(m.a) <= EPS:
        return (0.0, 1.0) if iv[0] - EPS <= m.b <= iv[1] + EPS else (1.0, 0.0)
    x0 = (iv[0] - m.b) / m.a
    x1 = (iv[1] - m.b) / m.a
    return (min(x0, x1), max(x0, x1))


def _compose(first: IntervalMap, then: IntervalMap) -> IntervalMap:
    dom = first.dom if first.dom is not None else (0.0, 1.0)
    if then.dom is not None:
        for inner in (first.L, first.U):
            p = _preimage(inner, then.dom)
            dom = (max(dom[0], p[0]), min(dom[1], p[1]))
    products = [
        AffineMap1(outer.a * inner.a, outer.a * inner.b + outer.b, dom)
        for outer in (then.L, then.U)
        for inner in (first.L, first.U)
    ]
    # Branch functions are pointwise ordered (crossings would need two rays
    # from one origin to meet off their origin), so picking at the domain
    # midpoint picks the branch valid on the whole domain.
    mid = (dom[0] + dom[1]) / 2.0 if dom[0] <= dom[1] else 0.5
    lo = min(products, key=lambda m: m(mid))
    hi = max(products, key=lambda m: m(mid))
    return IntervalMap(lo, hi)


def succ_signature(
    spdi: Spdi, sig: list[str], iv: tuple[float, float]
) -> Optional[tuple[float, float]]:
    """Step-by-step interval propagation along an edge sequence."""
    if not sig:
        raise SignatureError("empty signature")
    cur: Optional[tuple[float, float]] = iv
    for region_id, e_in, e_out in signature_steps(spdi, sig):
        cur = succ_interval(spdi, region_id, e_in, e_out, cur)
        if cur is None:
            return None
    return cur


def merge_intervals(pieces: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Union of closed intervals as a sorted list of disjoint pieces."""
    out: list[tuple[float, float]] = []
    for lo, hi in sorted(pieces):
        if out and lo <= out[-1][1] + EPS:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out
