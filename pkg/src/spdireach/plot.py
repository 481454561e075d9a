"""SVG rendering of partitions, tasks, and witness paths.

Output is built by hand (no plotting dependency): world coordinates are
y-flipped into screen space, the view box is the bounding box with a 5%
margin, and every element carries a class so the picture can be restyled.
"""

from __future__ import annotations

from typing import Optional
from xml.sax.saxutils import escape

from .explorer import Witness, WitnessCycle
from .geometry import Point2, Vector2, normalize, polygon_centroid
from .model import EdgeInterval, ReachTask, Spdi

_REGION_FILLS = ("#eef3fb", "#fdf6e7", "#eefbf0", "#fbeef3", "#f3eefb", "#fbf9ee")


def _num(x: float) -> str:
    return f"{x:.6g}"


class _Mapper:
    """World-to-screen transform: y axis flipped, 5% padding."""

    def __init__(self, spdi: Spdi) -> None:
        minx, miny, maxx, maxy = spdi.bbox
        self.flip = miny + maxy
        w = maxx - minx
        h = maxy - miny
        pad = 0.05 * max(w, h, 1e-9)
        self.view = (minx - pad, miny - pad, w + 2 * pad, h + 2 * pad)
        self.scale = max(w, h, 1e-9)

    def pt(self, p: Point2) -> tuple[float, float]:
        return p.x, self.flip - p.y


def _segment(m: _Mapper, a: Point2, b: Point2, cls: str, style: str) -> str:
    ax, ay = m.pt(a)
    bx, by = m.pt(b)
    return (
        f'<line class="{cls}" x1="{_num(ax)}" y1="{_num(ay)}" '
        f'x2="{_num(bx)}" y2="{_num(by)}" {style}/>'
    )


def _interval_points(spdi: Spdi, part: EdgeInterval) -> tuple[Point2, Point2]:
    p0, p1 = spdi.edge_points(part.edge)

    def at(lam: float) -> Point2:
        return Point2(p0.x + lam * (p1.x - p0.x), p0.y + lam * (p1.y - p0.y))

    return at(part.lo), at(part.hi)


def _interval_mid(spdi: Spdi, edge: str, lo: float, hi: float) -> Point2:
    p0, p1 = spdi.edge_points(edge)
    lam = (lo + hi) / 2.0
    return Point2(p0.x + lam * (p1.x - p0.x), p0.y + lam * (p1.y - p0.y))


def _arrow(m: _Mapper, base: Point2, d: Vector2, length: float, cls: str, color: str) -> str:
    u = normalize(d)
    tip = Point2(base.x + length * u.dx, base.y + length * u.dy)
    left = Point2(
        tip.x - 0.25 * length * u.dx + 0.12 * length * u.dy,
        tip.y - 0.25 * length * u.dy - 0.12 * length * u.dx,
    )
    right = Point2(
        tip.x - 0.25 * length * u.dx - 0.12 * length * u.dy,
        tip.y - 0.25 * length * u.dy + 0.12 * length * u.dx,
    )
    bx, by = m.pt(base)
    tx, ty = m.pt(tip)
    lx, ly = m.pt(left)
    rx, ry = m.pt(right)
    stroke = f'stroke="{color}" stroke-width="{_num(0.01 * m.scale)}" fill="none"'
    return (
        f'<g class="{cls}">'
        f'<line x1="{_num(bx)}" y1="{_num(by)}" x2="{_num(tx)}" y2="{_num(ty)}" {stroke}/>'
        f'<polyline points="{_num(lx)},{_num(ly)} {_num(tx)},{_num(ty)} '
        f'{_num(rx)},{_num(ry)}" {stroke}/>'
        "</g>"
    )


def _check_edges(spdi: Spdi, witness: Witness) -> None:
    known = spdi.edges_by_id
    names = [witness.hit.edge]
    for step in witness.steps:
        if isinstance(step, WitnessCycle):
            names.extend(step.edges)
            names.extend(e for e, _ in step.swept)
        else:
            names.append(step.edge)
    for name in names:
        if name not in known:
            raise ValueError(f"witness references unknown edge {name!r}")


def render_plot(
    spdi: Spdi,
    task: Optional[ReachTask] = None,
    witness: Optional[Witness] = None,
    pixels: int = 800,
) -> str:
    """Picture of the partition, optionally with a task and a witness path."""
    if witness is not None:
        _check_edges(spdi, witness)
    m = _Mapper(spdi)
    vx, vy, vw, vh = m.view
    thin = 0.004 * m.scale
    thick = 0.014 * m.scale
    parts: list[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{pixels}" '
        f'height="{round(pixels * vh / vw)}" '
        f'viewBox="{_num(vx)} {_num(vy)} {_num(vw)} {_num(vh)}">',
        f'<g class="regions" stroke="#7a8699" stroke-width="{_num(thin)}">',
    ]
    for i, region in enumerate(spdi.regions):
        poly = spdi.region_polygon(region.id)
        pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in (m.pt(p) for p in poly))
        fill = _REGION_FILLS[i % len(_REGION_FILLS)]
        parts.append(
            f'<polygon points="{pts}" fill="{fill}">'
            f"<title>{escape(region.id)}</title></polygon>"
        )
    parts.append("</g>")

    arrow_len = 0.05 * m.scale
    parts.append('<g class="cones">')
    for region in spdi.regions:
        c = polygon_centroid(spdi.region_polygon(region.id))
        parts.append(_arrow(m, c, region.dyn_l, arrow_len, "cone-left", "#4169c8"))
        parts.append(_arrow(m, c, region.dyn_r, arrow_len, "cone-right", "#c87e41"))
    parts.append("</g>")

    if witness is not None:
        style = f'stroke="#8a4fc8" stroke-width="{_num(thick)}" stroke-linecap="round"'
        chain: list[Point2] = []
        parts.append('<g class="witness">')
        for step in witness.steps:
            if isinstance(step, WitnessCycle):
                parts.append('<g class="witness-cycle" opacity="0.85">')
                for edge, (lo, hi) in step.swept:
                    a, b = _interval_points(spdi, EdgeInterval(edge, lo, hi))
                    parts.append(
                        _segment(
                            m, a, b, "cycle-swept",
                            f'stroke="#e0a23c" stroke-width="{_num(thick)}" '
                            'stroke-linecap="round"',
                        )
                    )
                parts.append("</g>")
                chain.append(_interval_mid(spdi, step.edges[0], *step.entry))
            else:
                a, b = _interval_points(spdi, EdgeInterval(step.edge, *step.interval))
                parts.append(_segment(m, a, b, "witness-step", style))
                chain.append(_interval_mid(spdi, step.edge, *step.interval))
        chain.append(_interval_mid(spdi, witness.hit.edge, witness.hit.lo, witness.hit.hi))
        if len(chain) > 1:
            pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in (m.pt(p) for p in chain))
            parts.append(
                f'<polyline class="witness-chain" points="{pts}" fill="none" '
                f'stroke="#8a4fc8" stroke-width="{_num(thin)}" stroke-dasharray='
                f'"{_num(3 * thin)} {_num(2 * thin)}"/>'
            )
        parts.append("</g>")

    if task is not None:
        parts.append('<g class="task">')
        for part in task.start:
            a, b = _interval_points(spdi, part)
            parts.append(
                _segment(
                    m, a, b, "start",
                    f'stroke="#1f9d3a" stroke-width="{_num(thick)}" stroke-linecap="round"',
                )
            )
        for part in task.final:
            a, b = _interval_points(spdi, part)
            parts.append(
                _segment(
                    m, a, b, "final",
                    f'stroke="#d43131" stroke-width="{_num(thick)}" stroke-linecap="round"',
                )
            )
        parts.append("</g>")

    if witness is not None:
        a, b = _interval_points(
            spdi, EdgeInterval(witness.hit.edge, witness.hit.lo, witness.hit.hi)
        )
        parts.append(
            _segment(
                m, a, b, "hit",
                f'stroke="#7d1fa8" stroke-width="{_num(1.4 * thick)}" stroke-linecap="round"',
            )
        )

    parts.append("</svg>")
    return "\n".join(parts)
