from __future__ import annotations

import math
import random

import pytest

from spdireach.generator import (
    GenConfig,
    GenerationError,
    generate_spdi,
    generate_tasks,
    sample_sites,
    voronoi_partition,
)
from spdireach.geometry import Point2
from spdireach.model import validate_spdi, validate_task


# -- partition construction ------------------------------------------------


def test_single_site_owns_the_whole_box():
    vertices, loops = voronoi_partition([Point2(40.0, 60.0)], side=100.0)
    assert len(loops) == 1
    corners = {(0.0, 0.0), (100.0, 0.0), (100.0, 100.0), (0.0, 100.0)}
    assert {(vertices[v].x, vertices[v].y) for v in loops[0]} == corners


def test_two_sites_split_the_box_at_the_bisector():
    sites = [Point2(25.0, 50.0), Point2(75.0, 50.0)]
    vertices, loops = voronoi_partition(sites, side=100.0)
    assert len(loops) == 2
    left = {(vertices[v].x, vertices[v].y) for v in loops[0]}
    right = {(vertices[v].x, vertices[v].y) for v in loops[1]}
    assert left == {(0.0, 0.0), (50.0, 0.0), (50.0, 100.0), (0.0, 100.0)}
    assert right == {(50.0, 0.0), (100.0, 0.0), (100.0, 100.0), (50.0, 100.0)}


def test_four_symmetric_sites_make_quadrants():
    sites = [
        Point2(25.0, 25.0),
        Point2(75.0, 25.0),
        Point2(25.0, 75.0),
        Point2(75.0, 75.0),
    ]
    vertices, loops = voronoi_partition(sites, side=100.0)
    assert len(loops) == 4
    assert all(len(loop) == 4 for loop in loops)
    center_hits = sum(
        1
        for loop in loops
        for v in loop
        if (vertices[v].x, vertices[v].y) == (50.0, 50.0)
    )
    assert center_hits == 4  # all quadrants share the snapped center vertex


def test_cells_contain_exactly_their_nearest_site():
    rng = random.Random(9)
    sites = sample_sites(rng, 12, side=1000.0)
    vertices, loops = voronoi_partition(sites, side=1000.0)
    assert len(loops) == len(sites)
    for site, loop in zip(sites, loops):
        pts = [vertices[v] for v in loop]
        cx = sum(p.x for p in pts) / len(pts)
        cy = sum(p.y for p in pts) / len(pts)
        dists = sorted(
            (math.hypot(s.x - cx, s.y - cy), i) for i, s in enumerate(sites)
        )
        assert sites[dists[0][1]] == site


def test_sample_sites_keeps_minimum_separation():
    rng = random.Random(0)
    sites = sample_sites(rng, 30, side=1000.0)
    assert len(sites) == 30
    min_d = min(
        math.hypot(a.x - b.x, a.y - b.y)
        for i, a in enumerate(sites)
        for b in sites[i + 1 :]
    )
    assert min_d >= 1000.0 * 1e-6
    assert all(0.0 <= s.x <= 1000.0 and 0.0 <= s.y <= 1000.0 for s in sites)


# -- full instances --------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(n_regions=0, seed=1)
    with pytest.raises(ValueError):
        GenConfig(n_regions=5, seed=1, side=0.0)
    with pytest.raises(ValueError):
        GenConfig(n_regions=5, seed=1, max_retries=-1)


@pytest.mark.parametrize("n,seed", [(4, 0), (10, 1), (25, 2), (60, 3)])
def test_generated_instances_validate_clean(n, seed):
    spdi = generate_spdi(GenConfig(n_regions=n, seed=seed))
    assert validate_spdi(spdi) == []
    assert len(spdi.regions) == n


def test_generation_is_deterministic():
    a = generate_spdi(GenConfig(n_regions=15, seed=77))
    b = generate_spdi(GenConfig(n_regions=15, seed=77))
    assert {v: (p.x, p.y) for v, p in a.vertices.items()} == {
        v: (p.x, p.y) for v, p in b.vertices.items()
    }
    for ra, rb in zip(a.regions, b.regions):
        assert (ra.id, ra.vertices) == (rb.id, rb.vertices)
        assert (ra.dyn_l, ra.dyn_r) == (rb.dyn_l, rb.dyn_r)


def test_different_seeds_differ():
    a = generate_spdi(GenConfig(n_regions=15, seed=1))
    b = generate_spdi(GenConfig(n_regions=15, seed=2))
    assert {(p.x, p.y) for p in a.vertices.values()} != {
        (p.x, p.y) for p in b.vertices.values()
    }


def test_generation_error_after_exhausting_retries(monkeypatch):
    import spdireach.generator as gen

    monkeypatch.setattr(gen, "assign_dynamics", lambda *a, **k: None)
    with pytest.raises(GenerationError, match="attempts"):
        generate_spdi(GenConfig(n_regions=5, seed=0, max_retries=3))


# -- task batches ----------------------------------------------------------


def test_hundred_tasks_cover_the_size_grid():
    spdi = generate_spdi(GenConfig(n_regions=12, seed=5))
    tasks = generate_tasks(spdi, count=100, seed=5)
    assert len(tasks) == 100
    sizes = [(len(t.start), len(t.final)) for t in tasks]
    assert sorted(sizes) == sorted((s, f) for s in range(1, 11) for f in range(1, 11))


def test_tasks_are_wellformed_and_deterministic():
    spdi = generate_spdi(GenConfig(n_regions=12, seed=5))
    tasks = generate_tasks(spdi, count=25, seed=8)
    again = generate_tasks(spdi, count=25, seed=8)
    assert tasks == again
    for task in tasks:
        assert validate_task(spdi, task) == []
        for part in task.start + task.final:
            assert 0.0 <= part.lo < part.hi <= 1.0
        # No repeated edge within one side of a task.
        assert len({p.edge for p in task.start}) == len(task.start)
        assert len({p.edge for p in task.final}) == len(task.final)


def test_task_batch_needs_enough_edges():
    spdi = generate_spdi(GenConfig(n_regions=2, seed=1))
    with pytest.raises(GenerationError, match="edges"):
        generate_tasks(spdi, count=100, seed=0)


def test_task_count_validation():
    spdi = generate_spdi(GenConfig(n_regions=4, seed=1))
    with pytest.raises(ValueError):
        generate_tasks(spdi, count=0, seed=0)
