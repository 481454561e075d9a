"""Planar primitives shared by every other module.

All geometric predicates use the single absolute tolerance ``EPS``.
Coordinates live at desk scale (unit fixtures up to [0, 1000]^2 generated
arenas), where 64-bit floats leave several orders of magnitude of headroom
over the tolerance.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional, Sequence

EPS = 1e-9


class GeometryError(ValueError):
    pass


class DegenerateOverlap(GeometryError):
    """Ray collinear with the target segment: infinitely many intersections."""


class ConeOrientationError(GeometryError):
    pass


class Point2(NamedTuple):
    x: float
    y: float


class Vector2(NamedTuple):
    dx: float
    dy: float


class Segment(NamedTuple):
    a: Point2
    b: Point2


class HalfPlane(NamedTuple):
    """Closed half plane ``{p : n . p <= c}``."""

    n: Vector2
    c: float


def cross(u: Sequence[float], v: Sequence[float]) -> float:
    return u[0] * v[1] - u[1] * v[0]


def dot(u: Sequence[float], v: Sequence[float]) -> float:
    return u[0] * v[0] + u[1] * v[1]


def sub(p: Sequence[float], q: Sequence[float]) -> Vector2:
    return Vector2(p[0] - q[0], p[1] - q[1])


def vec_len(v: Sequence[float]) -> float:
    return math.hypot(v[0], v[1])


def normalize(v: Sequence[float]) -> Vector2:
    length = math.hypot(v[0], v[1])
    if length <= EPS:
        raise GeometryError("cannot normalize a zero-length vector")
    return Vector2(v[0] / length, v[1] / length)


def rotate90(v: Sequence[float]) -> Vector2:
    """Counterclockwise quarter turn."""
    return Vector2(-v[1], v[0])


def ray_segment_param(
    origin: Point2, direction: Vector2, seg: Segment
) -> Optional[tuple[float, float]]:
    """First forward intersection of ``origin + t * direction`` with ``seg``.

    Returns ``(t, u)`` with ``t`` strictly forward and ``u`` in [0, 1] such
    that ``origin + t * direction == seg.a + u * (seg.b - seg.a)``, or None
    when the ray misses the segment.  Raises :class:`DegenerateOverlap` when
    the ray runs inside the segment's support line, where no single
    intersection parameter exists; callers decide how to treat that case.
    """
    e = sub(seg.b, seg.a)
    elen = vec_len(e)
    dlen = vec_len(direction)
    if elen <= EPS:
        raise GeometryError("degenerate segment")
    if dlen <= EPS:
        raise GeometryError("zero-length ray direction")
    w = sub(seg.a, origin)
    denom = cross(direction, e)
    if abs(denom) <= EPS * elen * dlen:
        # Parallel.  Collinear iff the segment start lies on the ray's line.
        if abs(cross(w, direction)) <= EPS * dlen * max(1.0, vec_len(w)):
            raise DegenerateOverlap("ray is collinear with segment")
        return None
    t = cross(w, e) / denom
    u = cross(w, direction) / denom
    if t * dlen <= EPS:
        return None
    if u < -EPS or u > 1.0 + EPS:
        return None
    return t, min(1.0, max(0.0, u))


def in_cone(v: Vector2, l: Vector2, r: Vector2) -> bool:
    """Membership of ``v`` in the closed cone swept counterclockwise from
    ``r`` to ``l``.  Boundary rays count as inside."""
    if vec_len(l) <= EPS or vec_len(r) <= EPS:
        raise ConeOrientationError("cone boundary vectors must be nonzero")
    if cross(r, l) < -EPS * vec_len(r) * vec_len(l):
        raise ConeOrientationError("cone must open counterclockwise from r to l")
    return cross(r, v) >= 0.0 and cross(v, l) >= 0.0


def polygon_area(poly: Sequence[Point2]) -> float:
    """Signed area, positive for counterclockwise winding."""
    total = 0.0
    n = len(poly)
    for i in range(n):
        p = poly[i]
        q = poly[(i + 1) % n]
        total += p[0] * q[1] - q[0] * p[1]
    return 0.5 * total


def polygon_centroid(poly: Sequence[Point2]) -> Point2:
    area = polygon_area(poly)
    if abs(area) <= EPS * EPS:
        xs = sum(p[0] for p in poly) / len(poly)
        ys = sum(p[1] for p in poly) / len(poly)
        return Point2(xs, ys)
    cx = cy = 0.0
    n = len(poly)
    for i in range(n):
        p = poly[i]
        q = poly[(i + 1) % n]
        w = p[0] * q[1] - q[0] * p[1]
        cx += (p[0] + q[0]) * w
        cy += (p[1] + q[1]) * w
    return Point2(cx / (6.0 * area), cy / (6.0 * area))


def is_convex_ccw(poly: Sequence[Point2], strict: bool = False) -> bool:
    """Convexity test for a counterclockwise vertex loop.

    ``strict`` additionally rejects collinear vertex triples.
    """
    n = len(poly)
    if n < 3:
        return False
    for i in range(n):
        u = sub(poly[(i + 1) % n], poly[i])
        v = sub(poly[(i + 2) % n], poly[(i + 1) % n])
        c = cross(u, v)
        if strict:
            if c <= EPS:
                return False
        elif c < -EPS:
            return False
    return polygon_area(poly) > EPS * EPS


def clip_convex(poly: Sequence[Point2], hp: HalfPlane) -> list[Point2]:
    """Intersection of a convex counterclockwise polygon with a half plane.

    Returns the clipped vertex loop, or an empty list when the intersection
    is empty or degenerate (area below ``EPS**2``).  Raises on non-convex
    input.
    """
    if not is_convex_ccw(poly):
        raise GeometryError("clip_convex requires a convex counterclockwise polygon")
    nlen = vec_len(hp.n)
    if nlen <= EPS:
        raise GeometryError("half-plane normal must be nonzero")
    nx, ny = hp.n[0] / nlen, hp.n[1] / nlen
    limit = hp.c / nlen

    out: list[Point2] = []
    n = len(poly)
    dists = [nx * p[0] + ny * p[1] - limit for p in poly]
    tols = [EPS * max(1.0, abs(p[0]), abs(p[1])) for p in poly]
    for i in range(n):
        j = (i + 1) % n
        a, b = poly[i], poly[j]
        da, db = dists[i], dists[j]
        a_in = da <= tols[i]
        b_in = db <= tols[j]
        if a_in:
            out.append(a)
        if a_in != b_in:
            # Strict sign change: the crossing point is well conditioned.
            s = da / (da - db)
            out.append(Point2(a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])))

    cleaned: list[Point2] = []
    for p in out:
        if cleaned and abs(p[0] - cleaned[-1][0]) <= EPS and abs(p[1] - cleaned[-1][1]) <= EPS:
            continue
        cleaned.append(p)
    if len(cleaned) >= 2:
        first, last = cleaned[0], cleaned[-1]
        if abs(first[0] - last[0]) <= EPS and abs(first[1] - last[1]) <= EPS:
            cleaned.pop()
    if len(cleaned) < 3 or abs(polygon_area(cleaned)) < EPS * EPS:
        return []
    return cleaned
