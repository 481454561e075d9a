from __future__ import annotations

import xml.etree.ElementTree as ET

import pytest

from spdireach import fixtures
from spdireach.explorer import Witness, solve_sequential
from spdireach.model import EdgeInterval, ReachTask
from spdireach.plot import render_plot

SVG = "{http://www.w3.org/2000/svg}"


def _task(start, final):
    return ReachTask(
        start=tuple(EdgeInterval(e, lo, hi) for e, lo, hi in start),
        final=tuple(EdgeInterval(e, lo, hi) for e, lo, hi in final),
    )


def _classes(root, tag):
    return [el.get("class") for el in root.iter(SVG + tag)]


def test_plain_render_is_wellformed_svg_with_one_polygon_per_region(spinbox):
    root = ET.fromstring(render_plot(spinbox))
    assert root.tag == SVG + "svg"
    assert len(list(root.iter(SVG + "polygon"))) == len(spinbox.regions)
    # Two cone arrows per region.
    groups = _classes(root, "g")
    assert groups.count("cone-left") == len(spinbox.regions)
    assert groups.count("cone-right") == len(spinbox.regions)


def test_viewbox_pads_the_bounding_box(hcorridor):
    root = ET.fromstring(render_plot(hcorridor, pixels=640))
    vx, vy, vw, vh = (float(t) for t in root.get("viewBox").split())
    minx, miny, maxx, maxy = hcorridor.bbox
    assert vx < minx and vy < miny
    assert vx + vw > maxx and vy + vh > maxy
    assert root.get("width") == "640"
    assert int(root.get("height")) == round(640 * vh / vw)


def test_task_overlay_draws_start_and_final_intervals(hcorridor):
    task = _task([(fixtures.HC_LEFT, 0.2, 0.8)], [(fixtures.HC_RIGHT, 0.1, 0.9)])
    root = ET.fromstring(render_plot(hcorridor, task=task))
    lines = _classes(root, "line")
    assert lines.count("start") == 1
    assert lines.count("final") == 1


def test_witness_overlay_draws_steps_chain_and_hit(hcorridor):
    task = _task([(fixtures.HC_LEFT, 0.2, 0.8)], [(fixtures.HC_RIGHT, 0.0, 1.0)])
    result = solve_sequential(hcorridor, task)
    assert result.reachable
    root = ET.fromstring(render_plot(hcorridor, task=task, witness=result.witness))
    lines = _classes(root, "line")
    assert "witness-step" in lines
    assert lines.count("hit") == 1
    assert "witness-chain" in _classes(root, "polyline")


def test_accelerated_cycle_renders_as_a_swept_group(spinbox):
    task = _task([(fixtures.SB_BOTTOM, 0.4, 0.6)], [(fixtures.SB_DIAG_BL, 0.9, 0.95)])
    result = solve_sequential(spinbox, task)
    assert result.reachable
    root = ET.fromstring(render_plot(spinbox, witness=result.witness))
    assert "witness-cycle" in _classes(root, "g")
    assert _classes(root, "line").count("cycle-swept") >= 4


def test_witness_with_unknown_edge_is_rejected(spinbox):
    ghost = Witness((), EdgeInterval("e98_99", 0.1, 0.2))
    with pytest.raises(ValueError, match="witness references unknown edge 'e98_99'"):
        render_plot(spinbox, witness=ghost)
