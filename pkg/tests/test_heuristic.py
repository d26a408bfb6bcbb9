import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import regular_polygon
from ylab import (cut_step, disturbance, gen_grid, initial_pair, initial_triangle, instance_from_matrix,
                  instance_from_points, maxmin_step, minmin_step, run_adding, run_cutting, tour_length,
                  validate_tour)
from ylab.heuristic import TourComplete, TourTooSmall, default_eps, replay
from ylab.io import dumps_trace


def brute_tie_set(inst, tour, variant, eps):
    """Plain loops over every (edge position, outside point)."""
    m = len(tour)
    outside = [p for p in range(inst.n) if p not in tour]
    d = inst.dist.tolist()
    table = {}
    for k in range(m):
        a, b = tour[k], tour[(k + 1) % m]
        for p in outside:
            table[k, p] = d[a][p] + d[p][b] - d[a][b]
    if variant == "minmin":
        low = min(table.values())
        return sorted(key for key, v in table.items() if v <= low + eps)
    edge_min = {k: min(table[k, p] for p in outside) for k in range(m)}
    top = max(edge_min.values())
    out = []
    for k in range(m):
        if edge_min[k] >= top - eps:
            out += [(k, p) for p in outside if table[k, p] <= edge_min[k] + eps]
    return sorted(out)


# -- disturbance ------------------------------------------------------------

def test_disturbance_examples():
    inst = instance_from_points([(0, 0), (2, 0), (1, 0), (1, 1), (0, 0)])
    assert disturbance(inst, (0, 1), 2) == 0
    assert disturbance(inst, (0, 1), 3) == pytest.approx(2 * math.sqrt(2) - 2, abs=1e-15)
    assert disturbance(inst, (0, 1), 4) == 0


def test_disturbance_negative_on_non_metric_matrix():
    inst = instance_from_matrix([[0, 1, 1, 10], [1, 0, 1, 1], [1, 1, 0, 1], [10, 1, 1, 0]])
    assert disturbance(inst, (0, 3), 1) == -8
    # the run must still complete
    trace = run_adding(inst, "minmin")
    assert validate_tour(inst, trace.final) == []


def test_diagonal_replacement_disturbance():
    # replacing a unit-grid diagonal by a horizontal and a vertical step
    g = gen_grid(2)
    delta = disturbance(g, (0, 3), 1)
    assert delta == pytest.approx(2 - math.sqrt(2), abs=1e-15)
    assert delta != pytest.approx(math.sqrt(2) - 1)


# -- initial pair and triangle ----------------------------------------------

def test_initial_pair(square, tri345):
    assert initial_pair(square).candidates == ((0, 2), (1, 3))
    assert initial_pair(tri345).candidates == ((1, 2),)
    equilateral = instance_from_points([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])
    assert initial_pair(equilateral).size == 3
    assert initial_pair(regular_polygon(6)).size == 3


def test_initial_triangle(square):
    assert initial_triangle(square, (0, 2)).candidates == (1, 3)
    inst = instance_from_points([(0, 0), (4, 0), (2, 1), (2, -3)])
    assert initial_triangle(inst, (0, 1)).candidates == (3,)


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_grid_initial_branches(k):
    g = gen_grid(k)
    pairs = initial_pair(g)
    assert pairs.size == 2
    corners = {0, k - 1, k * (k - 1), k * k - 1}
    for a, b in pairs.candidates:
        thirds = initial_triangle(g, (a, b))
        assert set(thirds.candidates) == corners - {a, b}


# -- steps ------------------------------------------------------------------

def test_maxmin_step_single_outside_point():
    inst = instance_from_points([(0, 0), (10, 0), (5, 8), (5, 1)])
    ties = maxmin_step(inst, (0, 1, 2))
    side = math.sqrt(26) + 7 - math.sqrt(89)
    base = 2 * math.sqrt(26) - 10
    assert side > base
    # the two slanted sides tie exactly by mirror symmetry
    assert [(c.position, c.point) for c in ties.candidates] == [(1, 3), (2, 3)]
    assert ties.value == pytest.approx(side, abs=1e-12)
    assert ties.choice.edge == (1, 2)


def test_maxmin_step_centroid_three_way_tie():
    inst = instance_from_points([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2), (0.5, math.sqrt(3) / 6)])
    assert maxmin_step(inst, (0, 1, 2)).size == 3


def test_minmin_step_example():
    inst = instance_from_points([(0, 0), (4, 0), (2, 3), (2, 0.1), (2, 2.9)])
    ties = minmin_step(inst, (0, 1, 2))
    deltas = {}
    for k, (a, b) in enumerate([(0, 1), (1, 2), (2, 0)]):
        for p in (3, 4):
            deltas[k, p] = disturbance(inst, (a, b), p)
    best = min(deltas, key=deltas.get)
    assert best == (0, 3)
    assert deltas[best] == pytest.approx(2 * math.sqrt(4.01) - 4)
    assert ties.size == 1 and (ties.choice.position, ties.choice.point) == best


def test_minmin_prefers_point_on_edge():
    inst = instance_from_points([(0, 0), (4, 0), (2, 3), (1, 0), (2, 1)])
    ties = minmin_step(inst, (0, 1, 2))
    assert ties.choice.point == 3 and ties.value == 0


def test_minmin_square_centre_four_way_tie():
    inst = instance_from_points([(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)])
    ties = minmin_step(inst, (0, 1, 2, 3))
    assert ties.size == 4
    assert ties.value == pytest.approx(2 * math.sqrt(0.5) - 1)


def test_step_on_complete_tour_raises(square):
    with pytest.raises(TourComplete):
        maxmin_step(square, (0, 1, 2, 3))
    with pytest.raises(TourComplete):
        minmin_step(square, (0, 1, 2, 3))


@pytest.mark.parametrize("variant", ["maxmin", "minmin"])
@given(n=st.integers(4, 10), seed=st.integers(0, 2**32 - 1), grid=st.booleans())
def test_tie_set_matches_brute_force(variant, n, seed, grid):
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, 4, (n, 2)) if grid else rng.random((n, 2))
    inst = instance_from_points(pts)
    m = int(rng.integers(3, n))
    tour = tuple(int(p) for p in rng.permutation(n)[:m])
    step = maxmin_step if variant == "maxmin" else minmin_step
    ties = step(inst, tour, 1e-9)
    got = [(c.position, c.point) for c in ties.candidates]
    assert got == brute_tie_set(inst, tour, variant, 1e-9)
    assert ties.chosen == 0 and got[0] == min(got)


# -- full runs --------------------------------------------------------------

def test_three_point_run(tri345):
    trace = run_adding(tri345)
    assert sorted(trace.final) == [0, 1, 2] and trace.steps == ()


def test_square_maxmin_is_the_bowtie(square):
    trace = run_adding(square, "maxmin")
    assert tour_length(square, trace.final) == pytest.approx(2 + 2 * math.sqrt(2))
    assert trace.tie_sizes() == [2, 2, 2]


@settings(max_examples=1000)
@given(n=st.integers(3, 30), seed=st.integers(0, 2**32 - 1), variant=st.sampled_from(["maxmin", "minmin"]))
def test_run_is_complete_and_replayable(n, seed, variant):
    inst = instance_from_points(np.random.default_rng(seed).random((n, 2)))
    trace = run_adding(inst, variant)
    assert validate_tour(inst, trace.final, require_complete=True) == []
    assert len(trace.steps) == n - 3
    assert replay(inst, trace) == trace.final


@given(n=st.integers(4, 25), seed=st.integers(0, 2**32 - 1), variant=st.sampled_from(["maxmin", "minmin"]))
def test_length_grows_by_chosen_disturbance(n, seed, variant):
    inst = instance_from_points(np.random.default_rng(seed).random((n, 2)))
    trace = run_adding(inst, variant)
    tour = trace.triangle
    for cand in trace.chosen_candidates:
        new = cand.apply(tour)
        before, after = tour_length(inst, tour), tour_length(inst, new)
        assert after - before == pytest.approx(cand.delta, rel=1e-9, abs=1e-12)
        assert cand.delta >= -1e-9
        tour = new


def test_trace_is_deterministic_bytes():
    inst = gen_grid(4)
    a = dumps_trace(run_adding(inst, "maxmin"))
    b = dumps_trace(run_adding(inst, "maxmin"))
    assert a == b
    doc = json.loads(a)
    assert doc["version"] == "ylab.trace/1" and len(doc["steps"]) == 13


def test_choices_override_policy(square):
    trace = run_adding(square, "maxmin", choices=[1, 1, 1])
    assert trace.path == (1, 1, 1)
    assert trace.triangle == (1, 3, 2)
    with pytest.raises(ValueError):
        run_adding(square, "maxmin", choices=[5])


def test_eps_from_environment(monkeypatch):
    monkeypatch.setenv("YLAB_EPS", "1e-6")
    assert default_eps() == 1e-6
    monkeypatch.delenv("YLAB_EPS")
    assert default_eps() == 1e-9


def test_unknown_variant(square):
    with pytest.raises(ValueError):
        run_adding(square, "maxmax")


# -- cutting ----------------------------------------------------------------

def test_cut_removes_edge_midpoint_first():
    inst = instance_from_points([(0, 0), (1, 0), (2, 0), (2, 2), (0, 2)])
    reduced, ties = cut_step(inst, (0, 1, 2, 3, 4))
    assert ties.choice.point == 1 and ties.choice.delta == 0
    assert reduced == (0, 2, 3, 4)
    assert run_cutting(inst, (0, 1, 2, 3, 4)).removed[0] == 1


def test_cut_pentagon_five_way_tie():
    inst = regular_polygon(5)
    _, ties = cut_step(inst, (0, 1, 2, 3, 4))
    assert ties.size == 5 and ties.choice.point == 0


def test_cut_stops_at_triangle(tri345):
    with pytest.raises(TourTooSmall):
        cut_step(tri345, (0, 1, 2))
    assert run_cutting(tri345, (0, 1, 2)).removed == ()


@given(n=st.integers(4, 20), seed=st.integers(0, 2**32 - 1))
def test_cut_length_identity_and_reinsertion(n, seed):
    rng = np.random.default_rng(seed)
    inst = instance_from_points(rng.random((n, 2)))
    tour = tuple(int(p) for p in rng.permutation(n))
    d = inst.dist
    reduced, ties = cut_step(inst, tour)
    c = ties.choice
    a, b, e = c.neighbors[0], c.point, c.neighbors[1]
    expected = tour_length(inst, tour) - d[a, b] - d[b, e] + d[a, e]
    assert tour_length(inst, reduced) == pytest.approx(expected, rel=1e-12)
    # re-insert at the edge the neighbours now share
    k = reduced.index(a)
    if reduced[(k + 1) % len(reduced)] != e:
        k = reduced.index(e)
    restored = reduced[: k + 1] + (b,) + reduced[k + 1:]
    assert tour_length(inst, restored) == pytest.approx(tour_length(inst, tour), rel=1e-12)


def test_cutting_magnitudes_are_not_always_increasing():
    from ylab import gen_random_uniform, optimal

    # first seed whose optimal tour cuts non-monotonically (third > fourth)
    inst = gen_random_uniform(8, 1)
    cuts = run_cutting(inst, optimal(inst).tour)
    assert not cuts.monotone
    assert cuts.deltas[2] > cuts.deltas[3]
