from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spdireach.geometry import (
    EPS,
    ConeOrientationError,
    DegenerateOverlap,
    GeometryError,
    HalfPlane,
    Point2,
    Segment,
    Vector2,
    clip_convex,
    cross,
    dot,
    in_cone,
    is_convex_ccw,
    normalize,
    polygon_area,
    polygon_centroid,
    ray_segment_param,
    rotate90,
)

UNIT_SQUARE = [Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1)]


def test_cross_and_dot():
    assert cross((1, 0), (0, 1)) == 1.0
    assert cross((0, 1), (1, 0)) == -1.0
    assert dot((1, 2), (3, 4)) == 11.0


def test_rotate90_is_counterclockwise():
    assert rotate90(Vector2(1, 0)) == Vector2(0, 1)
    assert rotate90(Vector2(0, 1)) == Vector2(-1, 0)


def test_normalize_rejects_zero():
    with pytest.raises(GeometryError):
        normalize(Vector2(0, 0))
    v = normalize(Vector2(3, 4))
    assert math.isclose(math.hypot(v.dx, v.dy), 1.0)


def test_ray_segment_param_basic_crossing():
    hit = ray_segment_param(Point2(0, 0), Vector2(1, 1), Segment(Point2(1, 0), Point2(1, 2)))
    assert hit is not None
    t, u = hit
    assert math.isclose(t, 1.0)
    assert math.isclose(u, 0.5)


def test_ray_segment_param_behind_origin_misses():
    assert ray_segment_param(Point2(2, 1), Vector2(1, 0), Segment(Point2(1, 0), Point2(1, 2))) is None


def test_ray_segment_param_parallel_misses():
    assert ray_segment_param(Point2(0, 0), Vector2(0, 1), Segment(Point2(1, 0), Point2(1, 2))) is None


def test_ray_segment_param_collinear_raises():
    with pytest.raises(DegenerateOverlap):
        ray_segment_param(Point2(1, -1), Vector2(0, 1), Segment(Point2(1, 0), Point2(1, 2)))


def test_ray_segment_param_endpoint_hit_clamps_u():
    hit = ray_segment_param(Point2(0, 0), Vector2(1, 0), Segment(Point2(1, 0), Point2(1, 2)))
    assert hit is not None
    t, u = hit
    assert math.isclose(t, 1.0)
    assert u == 0.0


def test_polygon_area_sign_tracks_winding():
    assert math.isclose(polygon_area(UNIT_SQUARE), 1.0)
    assert math.isclose(polygon_area(list(reversed(UNIT_SQUARE))), -1.0)


def test_polygon_centroid_of_square():
    c = polygon_centroid(UNIT_SQUARE)
    assert math.isclose(c.x, 0.5) and math.isclose(c.y, 0.5)


def test_is_convex_ccw():
    assert is_convex_ccw(UNIT_SQUARE)
    assert not is_convex_ccw(list(reversed(UNIT_SQUARE)))
    dented = [Point2(0, 0), Point2(1, 0), Point2(0.4, 0.4), Point2(0, 1)]
    assert not is_convex_ccw(dented)
    collinear = [Point2(0, 0), Point2(0.5, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1)]
    assert is_convex_ccw(collinear)
    assert not is_convex_ccw(collinear, strict=True)


def test_in_cone_closed_boundaries():
    l, r = Vector2(0, 1), Vector2(1, 0)
    assert in_cone(Vector2(1, 1), l, r)
    assert in_cone(l, l, r) and in_cone(r, l, r)
    assert not in_cone(Vector2(1, -0.1), l, r)
    assert not in_cone(Vector2(-1, -1), l, r)


def test_in_cone_rejects_clockwise_cone():
    with pytest.raises(ConeOrientationError):
        in_cone(Vector2(1, 1), Vector2(1, 0), Vector2(0, 1))


def test_clip_convex_halves_square():
    clipped = clip_convex(UNIT_SQUARE, HalfPlane(Vector2(1, 0), 0.5))
    assert math.isclose(polygon_area(clipped), 0.5)
    assert all(p.x <= 0.5 + EPS for p in clipped)


def test_clip_convex_empty_when_outside():
    assert clip_convex(UNIT_SQUARE, HalfPlane(Vector2(1, 0), -1.0)) == []


def test_clip_convex_keeps_whole_polygon():
    clipped = clip_convex(UNIT_SQUARE, HalfPlane(Vector2(1, 0), 2.0))
    assert math.isclose(polygon_area(clipped), 1.0)


@given(
    nx=st.floats(-1, 1),
    ny=st.floats(-1, 1),
    c=st.floats(-1.5, 1.5),
)
def test_clip_convex_properties(nx, ny, c):
    if math.hypot(nx, ny) <= 1e-3:
        return
    clipped = clip_convex(UNIT_SQUARE, HalfPlane(Vector2(nx, ny), c))
    if not clipped:
        return
    area = polygon_area(clipped)
    assert 0.0 < area <= 1.0 + EPS
    nlen = math.hypot(nx, ny)
    for p in clipped:
        assert nx * p.x + ny * p.y <= c + 1e-7 * max(1.0, nlen)
        assert -EPS <= p.x <= 1 + EPS and -EPS <= p.y <= 1 + EPS
