"""Self-intersection ("loop") diagnostics for planar tours."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .instance import Instance, Tour, tour_length, validate_tour

ORIENT_EPS = 1e-12


class CrossingStale(ValueError):
    pass


@dataclass(frozen=True)
class Crossing:
    """Two non-adjacent tour edges that meet.

    ``i`` and ``j`` are edge positions (``i < j``); ``degenerate`` marks
    touching or collinear overlap rather than a proper crossing.
    """

    i: int
    j: int
    edge1: tuple
    edge2: tuple
    point: tuple
    degenerate: bool = False


def orientation(p, q, r, eps: float = ORIENT_EPS) -> int:
    """Sign of the turn p -> q -> r: +1 left, -1 right, 0 collinear.

    Uses a float determinant when it is clearly away from zero and exact
    rational arithmetic otherwise. Determinants within ``eps`` of zero count
    as collinear.
    """
    px, py = float(p[0]), float(p[1])
    qx, qy = float(q[0]), float(q[1])
    rx, ry = float(r[0]), float(r[1])
    left = (qx - px) * (ry - py)
    right = (qy - py) * (rx - px)
    det = left - right
    bound = 1e-14 * (abs(left) + abs(right))
    if abs(det) > max(bound, eps):
        return 1 if det > 0 else -1
    if abs(det) <= eps and bound <= eps:
        return 0
    exact = ((Fraction(qx) - Fraction(px)) * (Fraction(ry) - Fraction(py))
             - (Fraction(qy) - Fraction(py)) * (Fraction(rx) - Fraction(px)))
    if abs(exact) <= eps:
        return 0
    return 1 if exact > 0 else -1


def _on_segment(p, q, r) -> bool:
    """For collinear p, q, r: whether r lies within the bounding box of p-q."""
    return (min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
            and min(p[1], q[1]) <= r[1] <= max(p[1], q[1]))


def segment_contact(a, b, c, d, eps: float = ORIENT_EPS):
    """Classify how closed segments ab and cd meet.

    Returns ``None`` when disjoint, else ``(point, degenerate)``.
    """
    o1 = orientation(a, b, c, eps)
    o2 = orientation(a, b, d, eps)
    o3 = orientation(c, d, a, eps)
    o4 = orientation(c, d, b, eps)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return _intersection_point(a, b, c, d), False
    if o1 == o2 == o3 == o4 == 0:
        shared = [p for p in (c, d) if _on_segment(a, b, p)] + [p for p in (a, b) if _on_segment(c, d, p)]
        if shared:
            return tuple(float(v) for v in shared[0]), True
        return None
    for o, (s, t, r) in ((o1, (a, b, c)), (o2, (a, b, d)), (o3, (c, d, a)), (o4, (c, d, b))):
        if o == 0 and _on_segment(s, t, r):
            return tuple(float(v) for v in r), True
    return None


def _intersection_point(a, b, c, d):
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    r, s = b - a, d - c
    denom = r[0] * s[1] - r[1] * s[0]
    t = ((c[0] - a[0]) * s[1] - (c[1] - a[1]) * s[0]) / denom
    x, y = a + t * r
    return (float(x), float(y))


def _adjacent(tour, i, j):
    m = len(tour)
    e1 = {tour[i], tour[(i + 1) % m]}
    e2 = {tour[j], tour[(j + 1) % m]}
    return bool(e1 & e2)


def _orient(a, b, c):
    return ((b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1])
            - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0]))


def _partners(p, q, i, tol, slack):
    """Edge positions j > i + 1 whose segments are not clearly apart from edge i."""
    m = len(p)
    js = np.arange(i + 2, m - 1 if i == 0 else m)
    if js.size == 0:
        return js, None
    lo_i, hi_i = np.minimum(p[i], q[i]), np.maximum(p[i], q[i])
    lo, hi = np.minimum(p[js], q[js]), np.maximum(p[js], q[js])
    box = ((lo[:, 0] <= hi_i[0] + slack) & (hi[:, 0] >= lo_i[0] - slack)
           & (lo[:, 1] <= hi_i[1] + slack) & (hi[:, 1] >= lo_i[1] - slack))
    js = js[box]
    o1 = _orient(p[i], q[i], p[js])
    o2 = _orient(p[i], q[i], q[js])
    o3 = _orient(p[js], q[js], p[i])
    o4 = _orient(p[js], q[js], q[i])
    apart = (((o1 > tol) & (o2 > tol)) | ((o1 < -tol) & (o2 < -tol))
             | ((o3 > tol) & (o4 > tol)) | ((o3 < -tol) & (o4 < -tol)))
    return js[~apart], (o1[~apart], o2[~apart], o3[~apart], o4[~apart])


def iter_crossings(inst: Instance, tour: Sequence[int], eps: float = ORIENT_EPS):
    """Lazily yield crossings ordered by (i, j); see :func:`find_crossings`."""
    xy = inst.require_coords()
    order = np.asarray(tour, dtype=int)
    m = len(order)
    if m < 4:
        return
    p = xy[order]
    q = xy[np.roll(order, -1)]
    scale = max(1.0, float(np.abs(xy).max()))
    for i in range(m - 2):
        js, _ = _partners(p, q, i, 1e-9 * scale * scale, 1e-9 * scale)
        for j in js:
            j = int(j)
            if _adjacent(order, i, j):
                continue
            hit = segment_contact(p[i], q[i], p[j], q[j], eps)
            if hit is not None:
                yield Crossing(i, j, (int(order[i]), int(order[(i + 1) % m])),
                               (int(order[j]), int(order[(j + 1) % m])), hit[0], hit[1])


def find_crossings(inst: Instance, tour: Sequence[int], eps: float = ORIENT_EPS) -> list:
    """All pairs of non-adjacent tour edges whose closed segments meet.

    A vectorised float screen discards pairs with disjoint bounding boxes or
    clearly separated orientations; survivors go through :func:`segment_contact`.
    """
    return list(iter_crossings(inst, tour, eps))


def has_crossing(inst: Instance, tour: Sequence[int]) -> bool:
    return next(iter_crossings(inst, tour), None) is not None


def uncross(inst: Instance, tour: Sequence[int], crossing: Crossing) -> Tour:
    """2-opt move: reverse the stretch between the two crossing edges."""
    order = tuple(int(p) for p in tour)
    m = len(order)
    i, j = crossing.i, crossing.j
    ok = (0 <= i < j < m
          and (order[i], order[(i + 1) % m]) == crossing.edge1
          and (order[j], order[(j + 1) % m]) == crossing.edge2)
    if not ok:
        raise CrossingStale("crossing edges are no longer on this tour")
    return order[: i + 1] + tuple(reversed(order[i + 1: j + 1])) + order[j + 1:]


def untangle(inst: Instance, tour: Sequence[int], max_moves: Optional[int] = None) -> Tour:
    """Remove self-intersections with strictly improving 2-opt moves.

    Sweeps the edges repeatedly; for the current edge, the first crossing
    partner whose exchange shortens the tour is uncrossed. Contacts that
    cannot be shortened (touching or collinear overlap) are left in place,
    which guarantees termination.
    """
    xy = inst.require_coords()
    d = inst.dist
    order = np.asarray(tour, dtype=int).copy()
    m = len(order)
    if m < 4:
        return tuple(int(v) for v in order)
    scale = max(1.0, float(np.abs(xy).max()))
    tol = 1e-9 * scale * scale
    min_gain = 1e-12 * max(1.0, tour_length(inst, order))
    moves = 0
    changed = True
    while changed:
        changed = False
        p = xy[order]
        q = xy[np.roll(order, -1)]
        i = 0
        while i < m - 2:
            js, orients = _partners(p, q, i, tol, 1e-9 * scale)
            if js.size:
                o1, o2, o3, o4 = orients
                proper = (o1 * o2 < 0) & (o3 * o4 < 0)
                js = js[proper]
            if js.size:
                a, b = order[i], order[i + 1]
                c, e = order[js], order[(js + 1) % m]
                gain = d[a, b] + d[c, e] - d[a, c] - d[b, e]
                good = np.flatnonzero(gain > min_gain)
                if good.size:
                    j = int(js[good[0]])
                    order[i + 1: j + 1] = order[i + 1: j + 1][::-1].copy()
                    p = xy[order]
                    q = xy[np.roll(order, -1)]
                    moves += 1
                    changed = True
                    if max_moves is not None and moves >= max_moves:
                        return tuple(int(v) for v in order)
                    continue
            i += 1
    return tuple(int(v) for v in order)


@dataclass(frozen=True)
class LoopRateReport:
    n: int
    trials: int
    with_crossings: int
    rate: float
    mean_gap_proxy: float
    seed: int
    variant: str = "maxmin"

    CSV_COLUMNS = ("n", "trials", "with_crossings", "rate", "mean_uncross_improvement", "seed")

    def csv_row(self) -> list:
        return [self.n, self.trials, self.with_crossings, repr(self.rate),
                repr(self.mean_gap_proxy), self.seed]

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _trial(n, seed, trial, variant, eps):
    from .generators import gen_random_uniform
    from .heuristic import run_adding

    inst = gen_random_uniform(n, seed, trial=trial)
    tour = run_adding(inst, variant, eps).final
    if not has_crossing(inst, tour):
        return False, 0.0
    before = tour_length(inst, tour)
    after = tour_length(inst, untangle(inst, tour))
    return True, (before - after) / before


def loop_rate_experiment(n: int, trials: int, variant: str = "maxmin", seed: int = 0,
                         eps: Optional[float] = None, n_jobs: int = 1) -> LoopRateReport:
    """Fraction of heuristic tours on uniform random instances that self-intersect.

    Trial ``t`` draws its instance from the stream seeded by ``(seed, t)``,
    so results do not depend on ``n_jobs``. ``mean_gap_proxy`` is the mean
    relative shortening achieved by untangling, over all trials.
    """
    if n < 3 or trials < 1:
        raise ValueError("need n >= 3 and trials >= 1")
    if n_jobs == 1:
        results = [_trial(n, seed, t, variant, eps) for t in range(trials)]
    else:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=n_jobs)(delayed(_trial)(n, seed, t, variant, eps) for t in range(trials))
    hits = sum(1 for crossed, _ in results if crossed)
    improvement = float(np.mean([gain for _, gain in results]))
    return LoopRateReport(n=n, trials=trials, with_crossings=hits, rate=hits / trials,
                          mean_gap_proxy=improvement, seed=seed, variant=variant)


def check_tour(inst: Instance, tour: Sequence[int]) -> dict:
    """Length, validity and crossing count for one tour."""
    problems = validate_tour(inst, tour, require_complete=True)
    out = {"valid": not problems, "problems": problems}
    if not problems:
        out["length"] = tour_length(inst, tour)
        out["crossings"] = len(find_crossings(inst, tour)) if inst.has_coords else None
    return out
