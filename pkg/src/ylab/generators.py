"""Reproducible instances: counterexample fixtures, grids and random point sets.

Random instances use numpy's PCG64 bit generator seeded through
``SeedSequence(seed)`` (or ``SeedSequence(seed, spawn_key=(trial,))`` for
experiment trials) and draw ``rng.random((n, 2))``: n points uniform in the
unit square.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .instance import Instance, instance_from_points


def gen_grid(k: int) -> Instance:
    """``k * k`` lattice points at integer coordinates, row-major ids."""
    if k < 2:
        raise ValueError("grid side must be at least 2")
    pts = [(i, j) for j in range(k) for i in range(k)]
    return instance_from_points(pts, name=f"grid{k}", meta={"kind": "grid", "k": k})


def rng_for(seed: int, trial=None) -> np.random.Generator:
    # spawn_key keeps trial streams apart from the plain seed stream; padding
    # the entropy list instead would make trial 0 equal to no trial at all
    key = () if trial is None else (int(trial),)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def gen_random_uniform(n: int, seed: int, trial=None) -> Instance:
    if n < 3:
        raise ValueError("need at least 3 points")
    pts = rng_for(seed, trial).random((n, 2))
    name = f"random{n}-s{seed}" + ("" if trial is None else f"-t{trial}")
    return instance_from_points(pts, name=name, meta={"kind": "random", "seed": seed, "trial": trial})


# Max-min fixture: A and B are the farthest pair, C completes the largest
# triangle, D is the last point. First hit of search_maxmin_counterexample()
# (A fixed at the origin, other corners scanned over the 5x5 integer lattice,
# no three collinear, no ties, positive gap, cutting the optimal tour removes a
# point other than D), relabelled A, B, C, D.
MAXMIN_POINTS = ((0.0, 1.0), (3.0, 0.0), (1.0, 2.0), (0.0, 0.0))

# Min-min fixture: outer triangle, two shrunken copies of it and a middle
# point. First hit of search_minmin_counterexample(seed=7).
MINMIN_OUTER = ((0.0, 0.0), (12.0, 0.0), (6.0, 9.0))
MINMIN_POINTS = MINMIN_OUTER + (
    (2.0, 1.25), (9.75, 1.5), (6.0, 6.5),
    (3.0, 1.5), (9.75, 1.25), (6.5, 6.0),
    (5.5, 3.25),
)
MINMIN_TOP = 2
MINMIN_MIDDLE = 9


@dataclass
class FixtureSpec:
    name: str
    build: Callable[[], Instance]
    predicates: dict = field(default_factory=dict)  # description -> check(inst)

    def failures(self, inst=None) -> list:
        inst = self.build() if inst is None else inst
        return [desc for desc, check in self.predicates.items() if not check(inst)]

    def generate(self) -> Instance:
        inst = self.build()
        bad = self.failures(inst)
        if bad:
            raise AssertionError(f"fixture {self.name!r} fails: {bad}")
        return inst


def _gap(inst, variant):
    from .heuristic import run_adding
    from .instance import tour_length
    from .oracle import gap, optimal

    return gap(tour_length(inst, run_adding(inst, variant).final), optimal(inst).length)


def _no_ties(variant):
    def check(inst):
        from .heuristic import run_adding

        return not run_adding(inst, variant).has_ties
    return check


def _segment_distance(p, a, b):
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    t = np.clip(np.dot(p - a, b - a) / np.dot(b - a, b - a), 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * (b - a))))


def boundary_depth(point, triangle=MINMIN_OUTER) -> float:
    """Distance from ``point`` to the nearest side of ``triangle``."""
    return min(_segment_distance(point, triangle[i], triangle[(i + 1) % 3]) for i in range(3))


def _outside_in(inst):
    from .heuristic import run_adding

    trace = run_adding(inst, "minmin")
    depths = [boundary_depth(inst.coords[p]) for p in trace.insertion_order]
    return set(trace.triangle) == {0, 1, 2} and all(a <= b for a, b in zip(depths, depths[1:]))


def top_neighbours(inst):
    """Neighbours of the top point in the min-min tour and in the optimal tour."""
    from .heuristic import run_adding
    from .oracle import optimal

    def around(tour):
        k = tour.index(MINMIN_TOP)
        return {tour[k - 1], tour[(k + 1) % len(tour)]}

    return around(run_adding(inst, "minmin").final), around(optimal(inst).tour)


def _top_prefers_side(inst):
    greedy, best = top_neighbours(inst)
    side, middle = best - greedy, greedy - best
    if len(side) != 1 or middle != {MINMIN_MIDDLE}:
        return False
    (s,) = side
    return inst.dist[MINMIN_TOP, s] < inst.dist[MINMIN_TOP, MINMIN_MIDDLE]


def _minmin_crossing_free(inst):
    from .analysis import find_crossings
    from .heuristic import run_adding

    return not find_crossings(inst, run_adding(inst, "minmin").final)


def _not_inverse(inst):
    from .heuristic import run_adding, run_cutting
    from .oracle import optimal

    cuts = run_cutting(inst, optimal(inst).tour)
    return cuts.reversed_removal != run_adding(inst, "maxmin").insertion_order


def _triangle(inst, variant):
    from .heuristic import run_adding

    return run_adding(inst, variant).triangle


def gen_maxmin_counterexample() -> Instance:
    return FIXTURES["maxmin-counterexample"].generate()


def gen_minmin_counterexample() -> Instance:
    return FIXTURES["minmin-counterexample"].generate()


FIXTURES = {
    "maxmin-counterexample": FixtureSpec(
        "maxmin-counterexample",
        lambda: instance_from_points(MAXMIN_POINTS, name="maxmin-counterexample"),
        {
            "no ties at any max-min decision": _no_ties("maxmin"),
            "initial triangle is A, B, C": lambda inst: _triangle(inst, "maxmin") == (0, 1, 2),
            "max-min tour is longer than optimal": lambda inst: _gap(inst, "maxmin") > 1e-6,
            "cutting the optimal tour does not retrace max-min": _not_inverse,
        },
    ),
    "minmin-counterexample": FixtureSpec(
        "minmin-counterexample",
        lambda: instance_from_points(MINMIN_POINTS, name="minmin-counterexample"),
        {
            "no ties at any min-min decision": _no_ties("minmin"),
            "outer triangle first, then inner points outside-in": _outside_in,
            "min-min tour is longer than optimal": lambda inst: _gap(inst, "minmin") > 1e-6,
            "optimal tour joins top to a side point closer than the middle": _top_prefers_side,
            "min-min tour has no self-intersection": _minmin_crossing_free,
        },
    ),
}


def search_maxmin_counterexample(span: int = 4):
    """Scan 4-point lattice configurations for a tie-free max-min failure.

    Returns the first hit as a list of points in scan order.
    """
    import itertools

    from .analysis import orientation
    from .heuristic import run_adding, run_cutting
    from .instance import tour_length
    from .oracle import optimal_permutation

    cells = [(x, y) for x in range(span + 1) for y in range(span + 1)]
    for b, c, d in itertools.product(cells, repeat=3):
        pts = [(0, 0), b, c, d]
        if any(orientation(*t) == 0 for t in itertools.combinations(pts, 3)):
            continue
        inst = instance_from_points(pts)
        trace = run_adding(inst, "maxmin")
        if trace.has_ties:
            continue
        opt = optimal_permutation(inst)
        if (tour_length(inst, trace.final) - opt.length) / opt.length <= 1e-6:
            continue
        if run_cutting(inst, opt.tour).reversed_removal != trace.insertion_order:
            return pts
    return None


def search_minmin_counterexample(seed: int = 7, tries: int = 5000):
    """Random search over nested-triangle layouts inside ``MINMIN_OUTER``.

    Each candidate places two scaled (possibly inverted) copies of the outer
    triangle about its centroid plus the centroid itself, jittered on a
    quarter-unit lattice, and is accepted when every fixture predicate holds.
    """
    outer = np.array(MINMIN_OUTER)
    centre = outer.mean(axis=0)
    scales = np.arange(0.25, 0.95, 0.05)
    rng = np.random.default_rng(seed)
    spec = FIXTURES["minmin-counterexample"]

    def interior(p):
        x, y = p
        return min(y, 1.5 * x - y, 1.5 * (12 - x) - y) > 1e-9

    for _ in range(tries):
        s1, s2 = sorted(rng.choice(scales, 2, replace=False))[::-1]
        flip1, flip2 = rng.integers(0, 2, 2)
        jitter = rng.integers(-2, 3, (7, 2)) * 0.25
        inner = np.vstack([(outer - centre) * s1 * (-1 if flip1 else 1) + centre,
                           (outer - centre) * s2 * (-1 if flip2 else 1) + centre,
                           centre[None]]) + jitter
        inner = np.round(inner * 4) / 4
        pts = [tuple(map(float, p)) for p in np.vstack([outer, inner])]
        if len(set(pts)) < len(pts) or not all(interior(p) for p in pts[3:]):
            continue
        if not spec.failures(instance_from_points(pts)):
            return pts
    return None
