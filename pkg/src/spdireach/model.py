"""SPDI data model: regions, edges, tasks, and structural validation.

An SPDI is a convex polygonal partition of a bounded rectangle where each
region carries a cone of admissible flow directions bounded by two vectors
``dyn_l`` and ``dyn_r`` (counterclockwise from ``dyn_r`` to ``dyn_l``,
opening below pi; the vectors may coincide).  Edges are undirected segments
shared by at most two regions, stored once in a canonical orientation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .geometry import (
    EPS,
    Point2,
    Vector2,
    cross,
    dot,
    is_convex_ccw,
    normalize,
    polygon_area,
    sub,
    vec_len,
)


class ModelError(ValueError):
    pass


class GoodnessViolation(ModelError):
    """Flow crosses an edge in both directions: mixed normal signs."""


class EdgeCoordinateError(ModelError):
    pass


class EdgeKind(enum.Enum):
    ENTRY = "entry"
    EXIT = "exit"
    TANGENT = "tangent"


@dataclass(frozen=True)
class Region:
    id: str
    vertices: tuple[int, ...]  # counterclockwise loop of vertex ids
    dyn_l: Vector2
    dyn_r: Vector2


@dataclass(frozen=True)
class Edge:
    """Undirected edge in canonical orientation.

    ``v0 -> v1`` points from the lexicographically smaller endpoint (by
    coordinates).  ``left_region`` is the region whose counterclockwise
    boundary traverses ``v0 -> v1``; ``right_region`` traverses ``v1 -> v0``.
    The id is ``e<min-vid>_<max-vid>`` over the endpoint vertex ids.
    """

    id: str
    v0: int
    v1: int
    left_region: Optional[str]
    right_region: Optional[str]


@dataclass(frozen=True)
class EdgeInterval:
    """Closed sub-interval of an edge in its [0, 1] coordinate."""

    edge: str
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise ModelError(
                f"edge interval [{self.lo}, {self.hi}] on {self.edge} "
                "must satisfy 0 <= lo <= hi <= 1"
            )


@dataclass(frozen=True)
class ReachTask:
    start: tuple[EdgeInterval, ...]
    final: tuple[EdgeInterval, ...]


class Spdi:
    """Immutable-by-convention SPDI instance with derived caches."""

    def __init__(
        self,
        vertices: dict[int, Point2],
        regions: list[Region],
        edges: list[Edge],
        region_edges: dict[str, list[tuple[str, bool]]],
    ) -> None:
        self.vertices = vertices
        self.regions = regions
        self.regions_by_id = {r.id: r for r in regions}
        self.edges = edges
        self.edges_by_id = {e.id: e for e in edges}
        self.region_edges = region_edges  # edge id + True when traversed v0->v1
        xs = [p.x for p in vertices.values()]
        ys = [p.y for p in vertices.values()]
        self.bbox = (min(xs), min(ys), max(xs), max(ys))
        self._violations: Optional[list[str]] = None
        self._classes: dict[str, dict[str, EdgeKind]] = {}
        self._hops: dict[str, tuple[tuple[str, str], ...]] = {}
        self._step_cache: dict = {}

    # -- geometry helpers -------------------------------------------------

    def point(self, vid: int) -> Point2:
        return self.vertices[vid]

    def edge_points(self, edge_id: str) -> tuple[Point2, Point2]:
        e = self.edges_by_id[edge_id]
        return self.vertices[e.v0], self.vertices[e.v1]

    def region_polygon(self, region_id: str) -> list[Point2]:
        return [self.vertices[v] for v in self.regions_by_id[region_id].vertices]

    def outward_normal(self, region_id: str, edge_id: str) -> Vector2:
        """Unit normal pointing out of the region across the edge."""
        for eid, forward in self.region_edges[region_id]:
            if eid == edge_id:
                p0, p1 = self.edge_points(edge_id)
                t = sub(p1, p0) if forward else sub(p0, p1)
                return normalize(Vector2(t.dy, -t.dx))
        raise ModelError(f"edge {edge_id} is not on the boundary of {region_id}")

    # -- derived caches ---------------------------------------------------

    def violations(self) -> list[str]:
        if self._violations is None:
            self._violations = validate_spdi(self)
        return self._violations

    def edge_classes(self, region_id: str) -> dict[str, EdgeKind]:
        got = self._classes.get(region_id)
        if got is None:
            got = classify_region_edges(self, region_id)
            self._classes[region_id] = got
        return got

    def exit_edges(self, region_id: str) -> list[str]:
        classes = self.edge_classes(region_id)
        return [eid for eid, _ in self.region_edges[region_id] if classes[eid] is EdgeKind.EXIT]

    def next_hops(self, edge_id: str) -> tuple[tuple[str, str], ...]:
        """Continuations from an edge: ``(region, exit edge)`` pairs for every
        adjacent region whose flow enters through this edge."""
        got = self._hops.get(edge_id)
        if got is not None:
            return got
        e = self.edges_by_id[edge_id]
        hops: list[tuple[str, str]] = []
        for rid in (e.left_region, e.right_region):
            if rid is None:
                continue
            if self.edge_classes(rid)[edge_id] is EdgeKind.ENTRY:
                for out in self.exit_edges(rid):
                    hops.append((rid, out))
        result = tuple(hops)
        self._hops[edge_id] = result
        return result


def build_spdi(
    vertices: Mapping[int, Sequence[float]],
    region_specs: Iterable[tuple[str, Sequence[int], Sequence[float], Sequence[float]]],
) -> Spdi:
    """Assemble an :class:`Spdi` from a vertex table and region loops.

    ``region_specs`` rows are ``(region_id, vertex_ids, dyn_l, dyn_r)``.
    Raises :class:`ModelError` on structural impossibilities (unknown vertex,
    duplicate ids, an edge side claimed twice); geometric and dynamic
    soundness is deferred to :func:`validate_spdi`.
    """
    vtable = {int(k): Point2(float(v[0]), float(v[1])) for k, v in vertices.items()}
    if not vtable:
        raise ModelError("an SPDI needs at least one vertex")

    regions: list[Region] = []
    region_edges: dict[str, list[tuple[str, bool]]] = {}
    edge_sides: dict[str, dict[str, Optional[str]]] = {}
    edge_ends: dict[str, tuple[int, int]] = {}

    for rid, vids, dyn_l, dyn_r in region_specs:
        if rid in region_edges:
            raise ModelError(f"duplicate region id {rid!r}")
        loop = tuple(int(v) for v in vids)
        if len(loop) < 3:
            raise ModelError(f"region {rid!r} needs at least 3 vertices")
        if len(set(loop)) != len(loop):
            raise ModelError(f"region {rid!r} repeats a vertex")
        for v in loop:
            if v not in vtable:
                raise ModelError(f"region {rid!r} references unknown vertex {v}")
        region = Region(
            id=rid,
            vertices=loop,
            dyn_l=Vector2(float(dyn_l[0]), float(dyn_l[1])),
            dyn_r=Vector2(float(dyn_r[0]), float(dyn_r[1])),
        )
        regions.append(region)
        sides: list[tuple[str, bool]] = []
        for i, a in enumerate(loop):
            b = loop[(i + 1) % len(loop)]
            pa, pb = vtable[a], vtable[b]
            if abs(pa.x - pb.x) <= EPS and abs(pa.y - pb.y) <= EPS:
                raise ModelError(f"region {rid!r} has a zero-length edge {a}-{b}")
            eid = f"e{min(a, b)}_{max(a, b)}"
            # Canonical orientation: from the lexicographically smaller point.
            v0, v1 = (a, b) if (pa.x, pa.y) < (pb.x, pb.y) else (b, a)
            prev = edge_ends.get(eid)
            if prev is None:
                edge_ends[eid] = (v0, v1)
                edge_sides[eid] = {"left": None, "right": None}
            elif prev != (v0, v1):
                raise ModelError(f"edge {eid} endpoints disagree between regions")
            forward = a == v0
            side = "left" if forward else "right"
            if edge_sides[eid][side] is not None:
                raise ModelError(
                    f"edge {eid} traversed in the same direction by regions "
                    f"{edge_sides[eid][side]!r} and {rid!r}"
                )
            edge_sides[eid][side] = rid
            sides.append((eid, forward))
        region_edges[rid] = sides

    edges = [
        Edge(
            id=eid,
            v0=edge_ends[eid][0],
            v1=edge_ends[eid][1],
            left_region=edge_sides[eid]["left"],
            right_region=edge_sides[eid]["right"],
        )
        for eid in edge_ends
    ]
    edges.sort(key=lambda e: (e.v0, e.v1))
    return Spdi(vtable, regions, edges, region_edges)


def point_at(spdi: Spdi, edge_id: str, lam: float) -> Point2:
    """Point at coordinate ``lam`` on an edge: (1 - lam) * v0 + lam * v1."""
    if lam < -EPS or lam > 1.0 + EPS:
        raise EdgeCoordinateError(f"coordinate {lam} outside [0, 1] on {edge_id}")
    lam = min(1.0, max(0.0, lam))
    p0, p1 = spdi.edge_points(edge_id)
    return Point2((1.0 - lam) * p0.x + lam * p1.x, (1.0 - lam) * p0.y + lam * p1.y)


def coord_of(spdi: Spdi, edge_id: str, p: Sequence[float]) -> float:
    """Edge coordinate of a point lying on the edge (within ``EPS``)."""
    p0, p1 = spdi.edge_points(edge_id)
    e = sub(p1, p0)
    lam = dot(sub(p, p0), e) / dot(e, e)
    lam = min(1.0, max(0.0, lam))
    q = Point2((1.0 - lam) * p0.x + lam * p1.x, (1.0 - lam) * p0.y + lam * p1.y)
    tol = EPS * max(1.0, abs(p[0]), abs(p[1])) * 10.0
    if vec_len(sub(p, q)) > tol:
        raise EdgeCoordinateError(f"point {tuple(p)} does not lie on edge {edge_id}")
    return lam


def _sign_bucket(value: float) -> int:
    if value > EPS:
        return 1
    if value < -EPS:
        return -1
    return 0


def classify_region_edges(spdi: Spdi, region_id: str) -> dict[str, EdgeKind]:
    """Classify each boundary edge of a region as ENTRY, EXIT, or TANGENT.

    EXIT: both cone vectors have a nonnegative outward component, at least
    one strictly positive.  ENTRY is symmetric with nonpositive components.
    TANGENT: both components vanish within tolerance.  Strictly mixed signs
    mean the flow could cross the edge both ways, which breaks the model
    assumptions; that raises :class:`GoodnessViolation` instead of guessing.
    """
    region = spdi.regions_by_id[region_id]
    dl = normalize(region.dyn_l)
    dr = normalize(region.dyn_r)
    out: dict[str, EdgeKind] = {}
    for eid, _ in spdi.region_edges[region_id]:
        n = spdi.outward_normal(region_id, eid)
        sl = _sign_bucket(dot(n, dl))
        sr = _sign_bucket(dot(n, dr))
        if sl >= 0 and sr >= 0 and (sl > 0 or sr > 0):
            out[eid] = EdgeKind.EXIT
        elif sl <= 0 and sr <= 0 and (sl < 0 or sr < 0):
            out[eid] = EdgeKind.ENTRY
        elif sl == 0 and sr == 0:
            out[eid] = EdgeKind.TANGENT
        else:
            raise GoodnessViolation(
                f"region {region_id} edge {eid}: cone crosses the edge in both "
                f"directions (normal components {dot(n, dl):.3g}, {dot(n, dr):.3g})"
            )
    return out


def _on_bbox_boundary(spdi: Spdi, edge_id: str) -> bool:
    minx, miny, maxx, maxy = spdi.bbox
    p0, p1 = spdi.edge_points(edge_id)
    for coord, lo, hi in ((0, minx, maxx), (1, miny, maxy)):
        for bound in (lo, hi):
            if abs(p0[coord] - bound) <= EPS and abs(p1[coord] - bound) <= EPS:
                return True
    return False


def validate_spdi(spdi: Spdi) -> list[str]:
    """Structural validation; returns human-readable violations (empty = valid).

    Checks, in order: region convexity/orientation, tiling of the bounding
    box (area match, no T-junctions, no interior holes), cone well-formedness,
    goodness of every region/edge pair, and single exit ownership per edge.
    """
    out: list[str] = []

    for region in spdi.regions:
        poly = spdi.region_polygon(region.id)
        if polygon_area(poly) <= 0:
            out.append(f"region {region.id}: vertex loop is not counterclockwise")
        elif not is_convex_ccw(poly, strict=True):
            out.append(f"region {region.id}: polygon is not strictly convex")

    minx, miny, maxx, maxy = spdi.bbox
    bbox_area = (maxx - minx) * (maxy - miny)
    total = sum(abs(polygon_area(spdi.region_polygon(r.id))) for r in spdi.regions)
    perimeter = 2.0 * ((maxx - minx) + (maxy - miny))
    if abs(total - bbox_area) > EPS * max(1.0, perimeter):
        out.append(
            f"tiling: region areas sum to {total!r} but the bounding box has "
            f"area {bbox_area!r}"
        )

    # T-junction scan: no vertex may sit strictly inside another edge.
    for edge in spdi.edges:
        p0, p1 = spdi.vertices[edge.v0], spdi.vertices[edge.v1]
        e = sub(p1, p0)
        ee = dot(e, e)
        for vid, p in spdi.vertices.items():
            if vid in (edge.v0, edge.v1):
                continue
            t = dot(sub(p, p0), e) / ee
            if t <= EPS or t >= 1.0 - EPS:
                continue
            q = Point2(p0.x + t * e.dx, p0.y + t * e.dy)
            if vec_len(sub(p, q)) <= EPS * max(1.0, abs(p.x), abs(p.y)) * 10.0:
                out.append(f"tiling: vertex {vid} splits edge {edge.id} (T-junction)")

    for edge in spdi.edges:
        side_count = (edge.left_region is not None) + (edge.right_region is not None)
        if side_count == 1 and not _on_bbox_boundary(spdi, edge.id):
            out.append(f"tiling: interior edge {edge.id} borders a hole")

    for region in spdi.regions:
        for name, v in (("dyn_l", region.dyn_l), ("dyn_r", region.dyn_r)):
            if vec_len(v) <= EPS:
                out.append(f"region {region.id}: {name} is a zero vector")
        if vec_len(region.dyn_l) > EPS and vec_len(region.dyn_r) > EPS:
            if cross(region.dyn_r, region.dyn_l) < -EPS * vec_len(region.dyn_r) * vec_len(
                region.dyn_l
            ):
                out.append(
                    f"region {region.id}: cone is not counterclockwise from dyn_r to dyn_l"
                )
            elif dot(region.dyn_r, region.dyn_l) < 0 and abs(
                cross(region.dyn_r, region.dyn_l)
            ) <= EPS * vec_len(region.dyn_r) * vec_len(region.dyn_l):
                out.append(f"region {region.id}: cone opens by half a turn or more")

    classes: dict[str, dict[str, EdgeKind]] = {}
    for region in spdi.regions:
        if any(v.startswith(f"region {region.id}:") for v in out):
            continue
        try:
            classes[region.id] = classify_region_edges(spdi, region.id)
        except GoodnessViolation as exc:
            out.append(f"goodness: {exc}")

    for edge in spdi.edges:
        owners = [
            rid
            for rid in (edge.left_region, edge.right_region)
            if rid in classes and classes[rid].get(edge.id) is EdgeKind.EXIT
        ]
        if len(owners) > 1:
            out.append(
                f"edge {edge.id}: exit edge of both {owners[0]} and {owners[1]}"
            )

    return out


def validate_task(spdi: Spdi, task: ReachTask) -> list[str]:
    """Task-level validation against a concrete SPDI."""
    out = []
    if not task.start:
        out.append("task has no start intervals")
    if not task.final:
        out.append("task has no final intervals")
    for kind, items in (("start", task.start), ("final", task.final)):
        for iv in items:
            if iv.edge not in spdi.edges_by_id:
                out.append(f"{kind} interval references unknown edge {iv.edge}")
    return out
