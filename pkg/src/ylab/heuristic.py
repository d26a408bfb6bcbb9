"""Yatsenko's adding procedure (max-min), the min-min variant and the cutting procedure.

Every decision compares values through one absolute tolerance ``eps``;
candidates within ``eps`` of a step's optimum form a :class:`TieSet`. The
deterministic policy always takes ``candidates[0]``: candidates are kept
sorted by (edge position, point id) for insertions, lexicographically for
initial pairs, and by point id for third points and cuts.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .instance import Instance, InvalidPointId, Tour, tour_length, validate_tour

DEFAULT_EPS = 1e-9
EPS_ENV = "YLAB_EPS"
TRACE_VERSION = "ylab.trace/1"
VARIANTS = ("maxmin", "minmin")


class TourComplete(ValueError):
    pass


class TourTooSmall(ValueError):
    pass


def default_eps() -> float:
    """``YLAB_EPS`` from the environment if set, else :data:`DEFAULT_EPS`."""
    raw = os.environ.get(EPS_ENV)
    return float(raw) if raw else DEFAULT_EPS


def _eps(eps):
    return default_eps() if eps is None else float(eps)


@dataclass(frozen=True)
class InsertionCandidate:
    position: int
    edge: tuple
    point: int
    delta: float

    def apply(self, tour: Sequence[int]) -> Tour:
        k = self.position
        return tuple(tour[: k + 1]) + (self.point,) + tuple(tour[k + 1:])


@dataclass(frozen=True)
class CutCandidate:
    position: int
    point: int
    neighbors: tuple
    change: float  # signed: d(a,c) - d(a,b) - d(b,c)

    @property
    def delta(self) -> float:
        return abs(self.change)


@dataclass(frozen=True)
class TieSet:
    """All candidates within tolerance of one decision's optimum."""

    candidates: tuple
    value: float
    chosen: int = 0

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("a tie set cannot be empty")
        if not 0 <= self.chosen < len(self.candidates):
            raise ValueError("chosen index out of range")

    @property
    def size(self) -> int:
        return len(self.candidates)

    @property
    def choice(self):
        return self.candidates[self.chosen]

    def __len__(self):
        return len(self.candidates)


def disturbance(inst: Instance, edge: Sequence[int], p: int) -> float:
    """Length change from replacing ``edge`` (a, b) by the detour a -> p -> b."""
    a, b = edge
    for q in (a, b, p):
        if not 0 <= q < inst.n:
            raise InvalidPointId(f"point id {q} out of range for n={inst.n}")
    if p == a or p == b:
        raise ValueError("inserted point must differ from the edge endpoints")
    d = inst.dist
    return float(d[a, p] + d[p, b] - d[a, b])


def initial_pair(inst: Instance, eps: Optional[float] = None) -> TieSet:
    """Every unordered pair within ``eps`` of the largest pairwise distance."""
    eps = _eps(eps)
    d = inst.dist
    iu, ju = np.triu_indices(inst.n, k=1)
    vals = d[iu, ju]
    best = vals.max()
    hits = np.flatnonzero(vals >= best - eps)
    pairs = tuple((int(iu[h]), int(ju[h])) for h in hits)
    return TieSet(candidates=pairs, value=float(best))


def initial_triangle(inst: Instance, pair: Sequence[int], eps: Optional[float] = None) -> TieSet:
    """Third points maximising d(a, c) + d(c, b) for the fixed pair (a, b)."""
    eps = _eps(eps)
    a, b = pair
    if a == b:
        raise ValueError("initial pair must have distinct points")
    d = inst.dist
    rest = np.array([c for c in range(inst.n) if c != a and c != b])
    gain = d[a, rest] + d[rest, b]
    best = gain.max()
    thirds = tuple(int(c) for c in rest[gain >= best - eps])
    return TieSet(candidates=thirds, value=float(best))


def insertion_deltas(inst: Instance, tour: Sequence[int]):
    """Matrix of disturbances, rows = tour edges by position, columns = outside points.

    Returns ``(delta, starts, ends, outside)``.
    """
    starts = np.fromiter(tour, dtype=np.intp, count=len(tour))
    if starts.min() < 0 or starts.max() >= inst.n:
        raise InvalidPointId("tour contains an out-of-range point id")
    mask = np.ones(inst.n, dtype=bool)
    mask[starts] = False
    outside = mask.nonzero()[0]
    if outside.size == 0:
        raise TourComplete("every point is already on the tour")
    ends = np.empty_like(starts)
    ends[:-1] = starts[1:]
    ends[-1] = starts[0]
    d = inst.dist
    # d is exactly symmetric, so d[b, p] == d[p, b]
    delta = d[starts[:, None], outside] + d[ends[:, None], outside] - d[starts, ends][:, None]
    return delta, starts, ends, outside


def _candidate(k, j, delta, starts, ends, outside):
    return InsertionCandidate(position=int(k), edge=(int(starts[k]), int(ends[k])),
                              point=int(outside[j]), delta=float(delta[k, j]))


def maxmin_step(inst: Instance, tour: Sequence[int], eps: Optional[float] = None) -> TieSet:
    """Per edge take the cheapest outside point; keep the edges whose minimum is largest.

    Inner ties (several points at an edge's minimum) are included alongside
    ties between edges.
    """
    eps = _eps(eps)
    if len(tour) < 3:
        raise ValueError("the max-min step needs a tour of at least 3 points")
    delta, starts, ends, outside = insertion_deltas(inst, tour)
    row_min = delta.min(axis=1)
    best = row_min.max()
    cands = []
    for k in np.flatnonzero(row_min >= best - eps):
        for j in np.flatnonzero(delta[k] <= row_min[k] + eps):
            cands.append(_candidate(k, j, delta, starts, ends, outside))
    return TieSet(candidates=tuple(cands), value=float(best))


def minmin_step(inst: Instance, tour: Sequence[int], eps: Optional[float] = None) -> TieSet:
    """All (edge, point) pairs within ``eps`` of the globally cheapest insertion."""
    eps = _eps(eps)
    if len(tour) < 3:
        raise ValueError("the min-min step needs a tour of at least 3 points")
    delta, starts, ends, outside = insertion_deltas(inst, tour)
    best = delta.min()
    ks, js = np.nonzero(delta <= best + eps)
    cands = tuple(_candidate(k, j, delta, starts, ends, outside) for k, j in zip(ks, js))
    return TieSet(candidates=cands, value=float(best))


STEPS = {"maxmin": maxmin_step, "minmin": minmin_step}


def _step_fn(variant):
    try:
        return STEPS[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}") from None


@dataclass(frozen=True)
class RunTrace:
    """Every decision of one adding run, enough to replay it."""

    variant: str
    eps: float
    pair_ties: TieSet
    third_ties: TieSet
    steps: tuple
    path: tuple  # index taken in each tie set: pair, third, then one per step
    final: Tour

    @property
    def triangle(self) -> Tour:
        a, b = self.pair_ties.candidates[self.path[0]]
        return (a, b, self.third_ties.candidates[self.path[1]])

    @property
    def insertion_order(self) -> tuple:
        return tuple(ts.candidates[i].point for ts, i in zip(self.steps, self.path[2:]))

    @property
    def chosen_candidates(self) -> tuple:
        return tuple(ts.candidates[i] for ts, i in zip(self.steps, self.path[2:]))

    def tie_sizes(self) -> list:
        return [self.pair_ties.size, self.third_ties.size] + [s.size for s in self.steps]

    @property
    def has_ties(self) -> bool:
        return any(s > 1 for s in self.tie_sizes())

    def to_dict(self) -> dict:
        def ins(c):
            return {"position": c.position, "edge": list(c.edge), "point": c.point, "delta": c.delta}

        return {
            "version": TRACE_VERSION,
            "variant": self.variant,
            "eps": self.eps,
            "initial_pair": {"value": self.pair_ties.value,
                             "ties": [list(p) for p in self.pair_ties.candidates],
                             "taken": self.path[0]},
            "initial_third": {"value": self.third_ties.value,
                              "ties": list(self.third_ties.candidates),
                              "taken": self.path[1]},
            "steps": [{"value": s.value, "ties": [ins(c) for c in s.candidates], "taken": i}
                      for s, i in zip(self.steps, self.path[2:])],
            "final": list(self.final),
        }


def run_adding(inst: Instance, variant: str = "maxmin", eps: Optional[float] = None,
               choices: Optional[Sequence[int]] = None) -> RunTrace:
    """Build a full tour by repeated insertion starting from the initial triangle.

    ``choices`` optionally overrides the tie index taken at each decision
    (pair, third point, then each insertion); missing entries fall back to
    the deterministic policy.
    """
    eps = _eps(eps)
    step = _step_fn(variant)
    choices = list(choices or [])

    def pick(i, ties):
        idx = choices[i] if i < len(choices) else ties.chosen
        if not 0 <= idx < ties.size:
            raise ValueError(f"choice {idx} out of range for a tie set of size {ties.size}")
        return idx

    pair_ties = initial_pair(inst, eps)
    pi = pick(0, pair_ties)
    a, b = pair_ties.candidates[pi]
    third_ties = initial_triangle(inst, (a, b), eps)
    ti = pick(1, third_ties)
    tour: Tour = (a, b, third_ties.candidates[ti])
    path = [pi, ti]
    steps = []
    while len(tour) < inst.n:
        ties = step(inst, tour, eps)
        idx = pick(len(path), ties)
        tour = ties.candidates[idx].apply(tour)
        steps.append(ties)
        path.append(idx)
    return RunTrace(variant=variant, eps=eps, pair_ties=pair_ties, third_ties=third_ties,
                    steps=tuple(steps), path=tuple(path), final=tour)


def replay(inst: Instance, trace: RunTrace) -> Tour:
    """Re-run the recorded choices; the result must equal ``trace.final``."""
    return run_adding(inst, trace.variant, trace.eps, trace.path).final


def cut_candidates(inst: Instance, tour: Sequence[int]) -> list:
    d = inst.dist
    order = list(tour)
    m = len(order)
    out = []
    for k, b in enumerate(order):
        a, c = order[k - 1], order[(k + 1) % m]
        out.append(CutCandidate(position=k, point=int(b), neighbors=(int(a), int(c)),
                                change=float(d[a, c] - d[a, b] - d[b, c])))
    return out


def cut_step(inst: Instance, tour: Sequence[int], eps: Optional[float] = None,
             choice: int = 0):
    """Remove the point whose removal changes the length least.

    Returns ``(reduced_tour, ties)``; ties are ordered by point id.
    """
    eps = _eps(eps)
    if len(tour) < 4:
        raise TourTooSmall("cutting stops at a triangle")
    cands = cut_candidates(inst, tour)
    best = min(c.delta for c in cands)
    tied = sorted((c for c in cands if c.delta <= best + eps), key=lambda c: c.point)
    ties = TieSet(candidates=tuple(tied), value=float(best))
    gone = ties.candidates[choice].point
    return tuple(p for p in tour if p != gone), ties


@dataclass(frozen=True)
class CuttingTrace:
    removed: tuple
    deltas: tuple
    steps: tuple
    final: Tour

    @property
    def reversed_removal(self) -> tuple:
        return tuple(reversed(self.removed))

    @property
    def monotone(self) -> bool:
        """Whether removal magnitudes never decrease (recorded, not assumed)."""
        return all(x <= y + 1e-12 for x, y in zip(self.deltas, self.deltas[1:]))


def run_cutting(inst: Instance, tour: Sequence[int], eps: Optional[float] = None) -> CuttingTrace:
    """Cut a complete tour down to a triangle, recording each removal."""
    problems = validate_tour(inst, tour, require_complete=True)
    if problems:
        raise ValueError("; ".join(problems))
    eps = _eps(eps)
    cur = tuple(int(p) for p in tour)
    removed, deltas, steps = [], [], []
    while len(cur) > 3:
        cur, ties = cut_step(inst, cur, eps)
        removed.append(ties.choice.point)
        deltas.append(ties.choice.delta)
        steps.append(ties)
    return CuttingTrace(tuple(removed), tuple(deltas), tuple(steps), cur)


@dataclass
class VariantCorrespondence:
    variant: str
    insertion_order: tuple
    corresponds: bool
    length: float
    optimal: bool


@dataclass
class CorrespondenceReport:
    optimal_tour: Tour
    optimal_length: float
    removal_order: tuple
    removal_deltas: tuple
    variants: dict = field(default_factory=dict)


def inverse_correspondence(inst: Instance, eps: Optional[float] = None) -> CorrespondenceReport:
    """Compare reversed cutting of the optimal tour with each adding variant."""
    from .oracle import optimal

    eps = _eps(eps)
    opt = optimal(inst)
    cuts = run_cutting(inst, opt.tour, eps)
    report = CorrespondenceReport(opt.tour, opt.length, cuts.removed, cuts.deltas)
    for variant in VARIANTS:
        trace = run_adding(inst, variant, eps)
        length = tour_length(inst, trace.final)
        report.variants[variant] = VariantCorrespondence(
            variant=variant,
            insertion_order=trace.insertion_order,
            corresponds=trace.insertion_order == cuts.reversed_removal,
            length=length,
            optimal=length <= opt.length + eps,
        )
    return report
