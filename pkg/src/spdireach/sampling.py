"""Random trajectory simulation for cross-checking reachability verdicts.

Every simulated trajectory is an admissible one: at each region entry a
direction is drawn uniformly in cone angle, and the segment to the boundary
is intersected exactly, so there is no time-discretization error.  If a
task is truly unreachable no simulated trajectory can ever cross a final
interval; a hit is therefore a hard counterexample to an UNREACHABLE
verdict.  Positions advance in lockstep numpy batches grouped by region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import EdgeKind, ReachTask, Spdi

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SimulationReport:
    trajectories: int
    crossings: int
    entered_final: int
    left_domain: int
    capped: int
    first_hit: Optional[tuple[str, float]]

    @property
    def any_hit(self) -> bool:
        return self.entered_final > 0


class _RegionGeom:
    """Per-region exit segments and cone angles, unpacked for numpy."""

    __slots__ = ("exit_ids", "x0", "y0", "dx", "dy", "theta_r", "width")

    def __init__(self, spdi: Spdi, region_id: str) -> None:
        ids = spdi.exit_edges(region_id)
        self.exit_ids = ids
        pts = [spdi.edge_points(eid) for eid in ids]
        self.x0 = np.array([p0.x for p0, _ in pts])
        self.y0 = np.array([p0.y for p0, _ in pts])
        self.dx = np.array([p1.x - p0.x for p0, p1 in pts])
        self.dy = np.array([p1.y - p0.y for p0, p1 in pts])
        region = spdi.regions_by_id[region_id]
        self.theta_r = math.atan2(region.dyn_r.dy, region.dyn_r.dx)
        theta_l = math.atan2(region.dyn_l.dy, region.dyn_l.dx)
        self.width = (theta_l - self.theta_r) % TWO_PI


def _entry_regions(spdi: Spdi, edge_id: str) -> tuple[str, ...]:
    e = spdi.edges_by_id[edge_id]
    out = []
    for rid in (e.left_region, e.right_region):
        if rid is not None and spdi.edge_classes(rid)[edge_id] is EdgeKind.ENTRY:
            out.append(rid)
    return tuple(out)


def simulate_task(
    spdi: Spdi,
    task: ReachTask,
    trajectories: int = 10_000,
    seed: int = 0,
    max_crossings: int = 1_000,
) -> SimulationReport:
    """Run admissible random trajectories from the task's start intervals.

    Stops early once any trajectory crosses a final interval.  Trajectories
    that leave the domain through an outer edge die; ones still alive after
    ``max_crossings`` region changes are counted as capped.
    """
    if trajectories < 1:
        raise ValueError("trajectories must be >= 1")
    if max_crossings < 1:
        raise ValueError("max_crossings must be >= 1")
    rng = np.random.default_rng(seed)
    finals: dict[str, list[tuple[float, float]]] = {}
    for part in task.final:
        finals.setdefault(part.edge, []).append((part.lo, part.hi))

    region_ids = [r.id for r in spdi.regions]
    region_index = {rid: i for i, rid in enumerate(region_ids)}
    geoms = [_RegionGeom(spdi, rid) for rid in region_ids]
    entry_map = {e.id: tuple(region_index[r] for r in _entry_regions(spdi, e.id)) for e in spdi.edges}

    n = trajectories
    px = np.empty(n)
    py = np.empty(n)
    region = np.full(n, -1, dtype=np.int64)
    alive = np.zeros(n, dtype=bool)

    entered = 0
    left_domain = 0
    first_hit: Optional[tuple[str, float]] = None

    def check_final(edge_id: str, lams: np.ndarray) -> np.ndarray:
        hits = np.zeros(lams.shape, dtype=bool)
        for lo, hi in finals.get(edge_id, ()):
            hits |= (lams >= lo) & (lams <= hi)
        return hits

    def pick_region(edge_id: str, count: int) -> np.ndarray:
        choices = entry_map[edge_id]
        if not choices:
            return np.full(count, -1, dtype=np.int64)
        if len(choices) == 1:
            return np.full(count, choices[0], dtype=np.int64)
        return rng.choice(np.array(choices, dtype=np.int64), size=count)

    # Seed trajectories round-robin over the start intervals.
    parts = task.start
    share = [n // len(parts) + (1 if i < n % len(parts) else 0) for i in range(len(parts))]
    at = 0
    for part, cnt in zip(parts, share):
        if cnt == 0:
            continue
        sl = slice(at, at + cnt)
        at += cnt
        lam = rng.uniform(part.lo, part.hi, size=cnt)
        hits = check_final(part.edge, lam)
        if hits.any() and first_hit is None:
            entered += int(hits.sum())
            first_hit = (part.edge, float(lam[hits][0]))
            cnt_alive = ~hits
        else:
            cnt_alive = np.ones(cnt, dtype=bool)
        p0, p1 = spdi.edge_points(part.edge)
        px[sl] = p0.x + lam * (p1.x - p0.x)
        py[sl] = p0.y + lam * (p1.y - p0.y)
        region[sl] = pick_region(part.edge, cnt)
        alive[sl] = cnt_alive & (region[sl] >= 0)
        left_domain += int((cnt_alive & (region[sl] < 0)).sum())

    crossings = 0
    steps = 0
    while alive.any() and first_hit is None and steps < max_crossings:
        steps += 1
        for ridx in np.unique(region[alive]):
            geom = geoms[ridx]
            idx = np.flatnonzero(alive & (region == ridx))
            m = idx.size
            if m == 0:
                continue
            if not geom.exit_ids:
                alive[idx] = False
                left_domain += m
                continue
            theta = geom.theta_r + geom.width * rng.uniform(0.0, 1.0, size=m)
            ddx = np.cos(theta)
            ddy = np.sin(theta)
            w0x = geom.x0[:, None] - px[idx][None, :]
            w0y = geom.y0[:, None] - py[idx][None, :]
            denom = ddx[None, :] * geom.dy[:, None] - ddy[None, :] * geom.dx[:, None]
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (w0x * geom.dy[:, None] - w0y * geom.dx[:, None]) / denom
                u = (w0x * ddy[None, :] - w0y * ddx[None, :]) / denom
            ok = (denom != 0.0) & (t > 0.0) & (u >= -1e-12) & (u <= 1.0 + 1e-12)
            t = np.where(ok, t, np.inf)
            win = np.argmin(t, axis=0)
            cols = np.arange(m)
            t_win = t[win, cols]
            lam = np.clip(u[win, cols], 0.0, 1.0)
            lost = ~np.isfinite(t_win)
            if lost.any():
                alive[idx[lost]] = False
                left_domain += int(lost.sum())
            live = ~lost
            px[idx[live]] += t_win[live] * ddx[live]
            py[idx[live]] += t_win[live] * ddy[live]
            crossings += int(live.sum())
            for j, edge_id in enumerate(geom.exit_ids):
                sel = np.flatnonzero(live & (win == j))
                if sel.size == 0:
                    continue
                lam_j = lam[sel]
                hits = check_final(edge_id, lam_j)
                if hits.any():
                    entered += int(hits.sum())
                    alive[idx[sel[hits]]] = False
                    if first_hit is None:
                        first_hit = (edge_id, float(lam_j[hits][0]))
                    sel = sel[~hits]
                nxt = pick_region(edge_id, sel.size)
                region[idx[sel]] = nxt
                dead = nxt < 0
                if dead.any():
                    alive[idx[sel[dead]]] = False
                    left_domain += int(dead.sum())
    capped = int(alive.sum())
    return SimulationReport(
        trajectories=n,
        crossings=crossings,
        entered_final=entered,
        left_domain=left_domain,
        capped=capped,
        first_hit=first_hit,
    )
