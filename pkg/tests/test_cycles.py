from __future__ import annotations

import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from spdireach import fixtures
from spdireach.cycles import (
    CycleOrientationError,
    CycleType,
    classify_cycle,
    endpoint_limit,
    iterate_cycle_oracle,
)
from spdireach.cycles import test_cycle_and_get_final_images as accelerate_cycle
from spdireach.successor import AffineMap1, IntervalMap


def _im(al, bl, au, bu, dom=None):
    return IntervalMap(AffineMap1(al, bl, dom), AffineMap1(au, bu, dom))


# -- endpoint limits ------------------------------------------------------


def test_endpoint_limit_contraction():
    fate = endpoint_limit(0.5, 0.1, 0.9)
    assert fate.limit == pytest.approx(0.2)
    assert fate.direction == -1


def test_endpoint_limit_identity_and_translation():
    fixed = endpoint_limit(1.0, 0.0, 0.3)
    assert (fixed.limit, fixed.direction) == (0.3, 0)
    assert endpoint_limit(1.0, 0.2, 0.3).limit == math.inf
    assert endpoint_limit(1.0, -0.2, 0.3).limit == -math.inf


def test_endpoint_limit_expansion_depends_on_side_of_fixpoint():
    fixed = endpoint_limit(2.0, -0.5, 0.5)
    assert (fixed.limit, fixed.direction) == (0.5, 0)
    assert endpoint_limit(2.0, -0.5, 0.6).limit == math.inf
    assert endpoint_limit(2.0, -0.5, 0.4).limit == -math.inf


@pytest.mark.parametrize("a", [0.0, -0.5, -2.0])
def test_endpoint_limit_rejects_nonpositive_slope(a):
    with pytest.raises(CycleOrientationError):
        endpoint_limit(a, 0.1, 0.5)


# -- frozen classifications ----------------------------------------------


def test_classify_stay_widens_to_the_limit_interval():
    res = classify_cycle(_im(0.5, 0.1, 0.5, 0.3), (0.2, 0.4))
    assert res.ctype is CycleType.STAY
    assert res.swept == ((0.2, pytest.approx(0.6)),)
    assert res.limits == pytest.approx((0.2, 0.6))
    assert res.iterations_used == 0


def test_classify_exit_right_sweeps_to_the_edge_end():
    res = classify_cycle(_im(1.0, 0.1, 1.0, 0.1), (0.1, 0.2))
    assert res.ctype is CycleType.EXIT_RIGHT
    assert res.swept == ((pytest.approx(0.1), pytest.approx(1.0)),)
    assert res.iterations_used == 9


def test_classify_exit_left():
    res = classify_cycle(_im(1.0, -0.1, 1.0, -0.1), (0.3, 0.5))
    assert res.ctype is CycleType.EXIT_LEFT
    assert res.swept == ((pytest.approx(0.0), pytest.approx(0.5)),)


def test_classify_exit_both():
    res = classify_cycle(_im(2.0, -0.6, 2.0, -0.6), (0.5, 0.7))
    assert res.ctype is CycleType.EXIT_BOTH
    assert res.swept == ((pytest.approx(0.0), pytest.approx(1.0)),)


def test_classify_die_records_shrinking_sweep():
    res = classify_cycle(_im(0.5, 0.4, 0.5, 0.1), (0.3, 0.6))
    assert res.ctype is CycleType.DIE
    assert res.iterations_used == 1
    assert res.swept == ((pytest.approx(0.3), pytest.approx(0.6)),)


def test_escape_wins_a_tie_with_emptiness():
    # Both events land on iteration 2; the escape must be reported.
    res = classify_cycle(_im(1.0, -0.2, 0.5, -0.2), (0.3, 0.6))
    assert res.ctype is CycleType.EXIT_LEFT
    assert res.iterations_used == 2


def test_emptiness_before_escape_is_die():
    res = classify_cycle(_im(1.0, -0.05, 0.5, -0.2), (0.3, 0.6))
    assert res.ctype is CycleType.DIE
    assert res.iterations_used == 1


# -- brute-force oracle ---------------------------------------------------


def test_oracle_matches_frozen_stay():
    res = iterate_cycle_oracle(_im(0.5, 0.1, 0.5, 0.3), (0.2, 0.4))
    assert res.ctype is CycleType.STAY
    assert not res.nonterminated
    assert res.limits == pytest.approx((0.2, 0.6), abs=1e-6)
    assert res.swept[0] == pytest.approx((0.2, 0.6), abs=1e-6)


def test_oracle_matches_frozen_die():
    res = iterate_cycle_oracle(_im(0.5, 0.4, 0.5, 0.1), (0.3, 0.6))
    assert res.ctype is CycleType.DIE
    assert res.iterations == 1
    assert res.swept == ((pytest.approx(0.3), pytest.approx(0.6)),)


def test_oracle_reports_nontermination_at_tiny_budget():
    res = iterate_cycle_oracle(_im(0.999, 0.0005, 0.999, 0.0005), (0.1, 0.9), max_iter=1)
    assert res.ctype is None
    assert res.nonterminated
    assert res.iterations == 1


@settings(max_examples=300, deadline=None)
@given(
    a=st.floats(0.05, 2.0),
    bl=st.floats(-1.0, 1.0),
    db=st.floats(0.0, 0.5),
    x0=st.floats(0.0, 1.0),
    w=st.floats(0.0, 1.0),
)
def test_classifier_agrees_with_brute_force(a, bl, db, x0, w):
    lo = min(x0, x0 + w * (1.0 - x0))
    hi = max(x0, x0 + w * (1.0 - x0))
    im = _im(a, bl, a, bl + db)
    # Stay away from the decision boundary where float noise flips verdicts.
    for end, x in ((im.L, lo), (im.U, hi)):
        lim = endpoint_limit(end.a, end.b, x).limit
        assume(not (-1e-6 < lim < 1e-6) and not (1.0 - 1e-6 < lim < 1.0 + 1e-6))
        if end.a > 1.0:
            assume(abs(x - end.b / (1.0 - end.a)) > 1e-6)
        if end.a == 1.0:
            assume(abs(end.b) > 1e-6)
    fast = classify_cycle(im, (lo, hi))
    slow = iterate_cycle_oracle(im, (lo, hi))
    assume(not slow.nonterminated)
    assert fast.ctype is slow.ctype
    for f, s in zip(fast.limits, slow.limits):
        if math.isfinite(f) and math.isfinite(s):
            assert f == pytest.approx(s, abs=1e-6)


# -- cycle acceleration over a real model ---------------------------------


def test_spinbox_acceleration_sweeps_every_cycle_edge(spinbox):
    cycle = [
        fixtures.SB_DIAG_BL,
        fixtures.SB_DIAG_BR,
        fixtures.SB_DIAG_TR,
        fixtures.SB_DIAG_TL,
    ]
    out = accelerate_cycle(spinbox, cycle, (0.2, 0.4), {})
    # The composition fixes the edge endpoint exactly; the 1-ulp overshoot
    # of the closed-form limit must not tip the verdict to an exit, and
    # recognizing that must not burn the whole iteration budget.
    assert out.analysis.ctype is CycleType.STAY
    assert out.analysis.iterations_used < 1000
    assert out.hit is None
    swept = dict(out.swept_by_edge)
    assert swept[fixtures.SB_DIAG_BL][0] == pytest.approx((0.2, 1.0))
    assert swept[fixtures.SB_DIAG_BR][0] == pytest.approx((0.0, 8.0 / 15.0))
    assert swept[fixtures.SB_DIAG_TR][0] == pytest.approx((0.0, 16.0 / 45.0))
    assert swept[fixtures.SB_DIAG_TL][0] == pytest.approx((1.0 - 32.0 / 135.0, 1.0))
    # Every per-edge band is offered back as a continuation image.
    got = {(iv.edge, round(iv.lo, 12), round(iv.hi, 12)) for iv in out.images}
    want = {
        (e, round(lo, 12), round(hi, 12)) for e, ps in out.swept_by_edge for lo, hi in ps
    }
    assert got == want


def test_spinbox_acceleration_finds_hit_on_a_later_cycle_edge(spinbox):
    cycle = [
        fixtures.SB_DIAG_BL,
        fixtures.SB_DIAG_BR,
        fixtures.SB_DIAG_TR,
        fixtures.SB_DIAG_TL,
    ]
    finals = {fixtures.SB_DIAG_TR: [(0.3, 0.5)]}
    out = accelerate_cycle(spinbox, cycle, (0.2, 0.4), finals)
    assert out.hit is not None
    assert out.hit.edge == fixtures.SB_DIAG_TR
    assert (out.hit.lo, out.hit.hi) == pytest.approx((0.3, 16.0 / 45.0))


def test_acceleration_hit_scan_follows_cycle_order(spinbox):
    cycle = [
        fixtures.SB_DIAG_BL,
        fixtures.SB_DIAG_BR,
        fixtures.SB_DIAG_TR,
        fixtures.SB_DIAG_TL,
    ]
    finals = {
        fixtures.SB_DIAG_TL: [(0.8, 0.9)],
        fixtures.SB_DIAG_BR: [(0.1, 0.2)],
    }
    out = accelerate_cycle(spinbox, cycle, (0.2, 0.4), finals)
    assert out.hit is not None
    assert out.hit.edge == fixtures.SB_DIAG_BR
