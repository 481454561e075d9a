"""Random SPDI construction and seeded reachability-task generation.

Instances are built in two stages: a Voronoi partition of a square around
random sites (each cell is the intersection of bisector half-planes, so the
partition is convex and edge-to-edge by construction), then a dynamics pass
that orients every cell's flow cone along a randomly sampled guide field (a
vortex blended with a drift term).  The field fixes a provisional owner for
each interior edge -- the side it points out of -- so neighbouring cells
start out wanting compatible crossing directions instead of fighting over
shared edges.  Each cell then picks, among the maximal direction windows
with a constant exit set, the feasible one closest to the field direction
at its centroid; when the closest-window exit sets collide, a worklist
reassigns edges with a steal-once rule that keeps the repair monotone.
The two flow vectors are sampled inside the chosen window shrunk by a
small angular margin.  Any dead end is a failure value, and the driver
retries the whole instance with a perturbed seed.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

from .geometry import EPS, HalfPlane, Point2, Vector2, clip_convex, polygon_area, sub
from .model import EdgeInterval, ReachTask, Spdi, build_spdi, validate_spdi

CONE_MARGIN_RAD = 1e-3
TWO_PI = 2.0 * math.pi


class GenerationError(RuntimeError):
    """All generation attempts were exhausted."""


class _Degenerate(Exception):
    """Internal retry signal for near-degenerate partitions."""


@dataclass(frozen=True)
class GenConfig:
    n_regions: int
    seed: int
    side: float = 1000.0
    max_retries: int = 32

    def __post_init__(self) -> None:
        if self.n_regions < 1:
            raise ValueError("n_regions must be >= 1")
        if self.side <= 0:
            raise ValueError("side must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


def sample_sites(rng: random.Random, n: int, side: float) -> list[Point2]:
    min_sep = side * 1e-6
    sites: list[Point2] = []
    attempts = 0
    while len(sites) < n:
        attempts += 1
        if attempts > 200 * (n + 1):
            raise _Degenerate("could not place well-separated sites")
        p = Point2(rng.uniform(0.0, side), rng.uniform(0.0, side))
        if all(math.hypot(p.x - q.x, p.y - q.y) >= min_sep for q in sites):
            sites.append(p)
    return sites


def voronoi_partition(
    sites: list[Point2], side: float
) -> tuple[dict[int, Point2], list[tuple[int, ...]]]:
    """Clip the square by site bisectors; returns a vertex table and CCW loops.

    Raises the internal retry signal when a cell degenerates (too small or
    collapsed by snapping).
    """
    square = [
        Point2(0.0, 0.0),
        Point2(side, 0.0),
        Point2(side, side),
        Point2(0.0, side),
    ]
    snap = side * 1e-9
    canonical: dict[tuple[int, int], Point2] = {}

    def snapped(p: Point2) -> Point2:
        kx, ky = round(p.x / snap), round(p.y / snap)
        # Probe neighbouring grid keys too: two computations of the same
        # corner may straddle a rounding boundary.
        for key in ((kx + dx, ky + dy) for dx in (0, -1, 1) for dy in (0, -1, 1)):
            q = canonical.get(key)
            if q is not None and math.hypot(p.x - q.x, p.y - q.y) <= snap:
                return q
        return canonical.setdefault((kx, ky), p)

    loops_pts: list[list[Point2]] = []
    for i, site in enumerate(sites):
        cell = square
        for j, other in enumerate(sites):
            if i == j:
                continue
            n = sub(other, site)
            mid = Point2((site.x + other.x) / 2.0, (site.y + other.y) / 2.0)
            cell = clip_convex(cell, HalfPlane(n, n.dx * mid.x + n.dy * mid.y))
            if not cell:
                raise _Degenerate(f"cell of site {i} vanished")
        pts: list[Point2] = []
        for p in (snapped(q) for q in cell):
            if not pts or pts[-1] != p:
                pts.append(p)
        while len(pts) > 1 and pts[0] == pts[-1]:
            pts.pop()
        if len(pts) < 3 or abs(polygon_area(pts)) < EPS * side * side * 1e-3:
            raise _Degenerate(f"cell of site {i} degenerated")
        loops_pts.append(pts)
    order = sorted({p for loop in loops_pts for p in loop})
    vid_of = {p: vid for vid, p in enumerate(order)}
    vertices = dict(enumerate(order))
    loops = [tuple(vid_of[p] for p in loop) for loop in loops_pts]
    return vertices, loops


def _ccw_vector(spdi: Spdi, edge_id: str, forward: bool) -> Vector2:
    p0, p1 = spdi.edge_points(edge_id)
    return sub(p1, p0) if forward else sub(p0, p1)


def _make_field(
    rng: random.Random, vertices: dict[int, Point2]
) -> Callable[[float, float], float]:
    """Sample a guide field; returns the field direction (radians) at a point.

    The field is a unit vortex around a random centre inside the partition's
    bounding box blended with a random constant drift.  Vortex fields make
    long circulating corridors, drift makes sink-like flows; the blend
    weight interpolates between the two shapes.
    """
    xs = [p.x for p in vertices.values()]
    ys = [p.y for p in vertices.values()]
    cx = min(xs) + rng.uniform(0.1, 0.9) * (max(xs) - min(xs))
    cy = min(ys) + rng.uniform(0.1, 0.9) * (max(ys) - min(ys))
    chirality = 1.0 if rng.random() < 0.5 else -1.0
    drift = rng.uniform(0.0, TWO_PI)
    weight = rng.uniform(0.0, 0.8)
    ux, uy = math.cos(drift), math.sin(drift)

    def angle_at(x: float, y: float) -> float:
        rx, ry = x - cx, y - cy
        n = math.hypot(rx, ry) or 1e-9
        vx = chirality * (-ry / n) * (1.0 - weight) + weight * ux
        vy = chirality * (rx / n) * (1.0 - weight) + weight * uy
        return math.atan2(vy, vx)

    return angle_at


def _direction_windows(
    boundary: list[str], tangents: list[Vector2], anchor: float
) -> list[tuple[float, float, float, tuple[str, ...]]]:
    """Maximal direction windows of a cell with a constant exit set.

    A direction d exits edge t iff cross(d, t) > 0, so the exit set only
    changes at the tangent directions and their opposites; between two
    consecutive critical angles it is fixed and, the cell being convex,
    nonempty and contiguous along the boundary.  Windows thinner than twice
    the sampling margin are dropped.  Returns (distance from anchor, lo,
    hi, exit edges) sorted by distance; the +pi symmetry of the critical
    set caps every window below pi, so any cone drawn inside one window
    automatically has an opening under pi.
    """
    crit = sorted(
        {math.atan2(t.dy, t.dx) % TWO_PI for t in tangents}
        | {(math.atan2(t.dy, t.dx) + math.pi) % TWO_PI for t in tangents}
    )
    windows = []
    for j, lo in enumerate(crit):
        hi = crit[j + 1] if j + 1 < len(crit) else crit[0] + TWO_PI
        if hi - lo <= 2.0 * CONE_MARGIN_RAD:
            continue
        mid = (lo + hi) / 2.0
        dx, dy = math.cos(mid), math.sin(mid)
        run = tuple(
            eid for eid, t in zip(boundary, tangents) if dx * t.dy - dy * t.dx > 0.0
        )
        if not run:
            continue
        if lo <= anchor < hi or lo <= anchor + TWO_PI < hi:
            dist = 0.0
        else:
            dist = min((lo - anchor) % TWO_PI, (anchor - hi) % TWO_PI)
        windows.append((dist, lo, hi, run))
    windows.sort(key=lambda w: (w[0], w[1]))
    return windows


def assign_dynamics(
    vertices: dict[int, Point2],
    loops: list[tuple[int, ...]],
    rng: random.Random,
) -> Optional[Spdi]:
    """Pick exit sets and flow cones for every cell; None signals failure.

    A sampled guide field assigns each edge a provisional owner (the side
    the field exits through), and each cell the window nearest the field
    direction at its centroid whose exit set it already owns.  Cells left
    without a clean window steal the missing edges and requeue the victims;
    a stolen edge is locked against being stolen back, which makes the
    repair monotone, so the worklist either settles on a consistent
    assignment or dies against the iteration budget.
    """
    names = [f"r{i}" for i in range(len(loops))]
    skeleton = build_spdi(
        vertices, [(n, loop, (1.0, 0.0), (1.0, 0.0)) for n, loop in zip(names, loops)]
    )
    field = _make_field(rng, vertices)

    owner: dict[str, Optional[str]] = {}
    for edge in skeleton.edges:
        p0, p1 = skeleton.edge_points(edge.id)
        a = field((p0.x + p1.x) / 2.0, (p0.y + p1.y) / 2.0)
        cr = math.cos(a) * (p1.y - p0.y) - math.sin(a) * (p1.x - p0.x)
        owner[edge.id] = (
            edge.left_region if cr > 0 else edge.right_region if cr < 0 else None
        )

    windows: dict[str, list[tuple[float, float, float, tuple[str, ...]]]] = {}
    for rid, loop in zip(names, loops):
        boundary = skeleton.region_edges[rid]
        tangents = [_ccw_vector(skeleton, eid, fwd) for eid, fwd in boundary]
        pts = [vertices[v] for v in loop]
        anchor = field(
            sum(p.x for p in pts) / len(pts), sum(p.y for p in pts) / len(pts)
        )
        windows[rid] = _direction_windows(
            [eid for eid, _ in boundary], tangents, anchor % TWO_PI
        )
        if not windows[rid]:
            return None

    locked: set[str] = set()

    def choose(rid: str) -> Optional[tuple[float, float, tuple[str, ...], tuple[str, ...]]]:
        for _, lo, hi, run in windows[rid]:
            if all(owner.get(eid) == rid for eid in run):
                return lo, hi, run, ()
        best = None
        for dist, lo, hi, run in windows[rid]:
            foreign = tuple(eid for eid in run if owner.get(eid) != rid)
            if any(eid in locked for eid in foreign):
                continue
            key = (len(foreign), dist, lo)
            if best is None or key < best[0]:
                best = (key, lo, hi, run, foreign)
        if best is None:
            return None
        return best[1], best[2], best[3], best[4]

    chosen: dict[str, tuple[float, float, tuple[str, ...]]] = {}
    work = deque(names)
    budget = 10 * len(names)
    while work:
        budget -= 1
        if budget < 0:
            return None
        rid = work.popleft()
        got = choose(rid)
        if got is None:
            return None
        lo, hi, run, foreign = got
        chosen[rid] = (lo, hi, run)
        for eid in foreign:
            victim = owner.get(eid)
            owner[eid] = rid
            locked.add(eid)
            if victim is not None and victim not in work:
                work.append(victim)
    for rid in names:
        if any(owner.get(eid) != rid for eid in chosen[rid][2]):
            return None

    cones: dict[str, tuple[Vector2, Vector2]] = {}
    runs: dict[str, set[str]] = {}
    for rid in names:
        lo, hi, run = chosen[rid]
        a1 = rng.uniform(lo + CONE_MARGIN_RAD, hi - CONE_MARGIN_RAD)
        a2 = rng.uniform(lo + CONE_MARGIN_RAD, hi - CONE_MARGIN_RAD)
        if a1 > a2:
            a1, a2 = a2, a1
        cones[rid] = (
            Vector2(math.cos(a2), math.sin(a2)),
            Vector2(math.cos(a1), math.sin(a1)),
        )
        runs[rid] = set(run)
    spdi = build_spdi(
        vertices,
        [(n, loop, tuple(cones[n][0]), tuple(cones[n][1])) for n, loop in zip(names, loops)],
    )
    try:
        for rid in names:
            if set(spdi.exit_edges(rid)) != runs[rid]:
                return None
    except Exception:
        return None
    return spdi


def generate_spdi(cfg: GenConfig) -> Spdi:
    """Seeded random SPDI; every emitted instance passes validate_spdi."""
    for attempt in range(cfg.max_retries + 1):
        rng = random.Random(cfg.seed ^ attempt)
        try:
            sites = sample_sites(rng, cfg.n_regions, cfg.side)
            vertices, loops = voronoi_partition(sites, cfg.side)
        except _Degenerate:
            continue
        try:
            spdi = assign_dynamics(vertices, loops, rng)
        except Exception:
            spdi = None
        if spdi is None or validate_spdi(spdi):
            continue
        return spdi
    raise GenerationError(
        f"no valid instance for seed {cfg.seed} after {cfg.max_retries + 1} attempts"
    )


def generate_tasks(spdi: Spdi, count: int, seed: int) -> list[ReachTask]:
    """Seeded random tasks; count=100 realizes every (s, f) in {1..10}^2 once."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = random.Random(seed)
    edge_ids = [e.id for e in spdi.edges]
    if count == 100:
        pairs = [(s, f) for s in range(1, 11) for f in range(1, 11)]
    else:
        pairs = [(rng.randint(1, 10), rng.randint(1, 10)) for _ in range(count)]
    need = max(max(s, f) for s, f in pairs)
    if need > len(edge_ids):
        raise GenerationError(
            f"instance has {len(edge_ids)} edges, tasks need up to {need} distinct ones"
        )

    def intervals(n: int) -> tuple[EdgeInterval, ...]:
        out = []
        for edge in rng.sample(edge_ids, n):
            lo = rng.uniform(0.0, 0.99)
            hi = rng.uniform(lo + 0.01, 1.0)
            out.append(EdgeInterval(edge, lo, hi))
        return tuple(out)

    return [ReachTask(intervals(s), intervals(f)) for s, f in pairs]
