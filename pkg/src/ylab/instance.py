"""Problem representation: instances, tours and their validation.

Tours are plain tuples of point indices read cyclically; an edge is the pair
``(order[k], order[k + 1])`` with wrap-around, and ``k`` is its *position*.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

Tour = tuple  # tuple[int, ...]
Edge = tuple  # tuple[int, int]

EXACT = "exact"
EUC_2D = "euc_2d"  # TSPLIB: nearest-integer rounding


class InstanceError(ValueError):
    """Base class for malformed problem input."""


class TooFewPoints(InstanceError):
    pass


class NonFiniteCoordinate(InstanceError):
    pass


class NotSquare(InstanceError):
    pass


class NotSymmetric(InstanceError):
    pass


class NegativeDistance(InstanceError):
    pass


class NonzeroDiagonal(InstanceError):
    pass


class InvalidPointId(IndexError):
    pass


class CoordinatesRequired(ValueError):
    """Raised by geometric operations on a matrix-only instance."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Instance:
    """A symmetric TSP instance.

    Build with :func:`instance_from_points` or :func:`instance_from_matrix`
    rather than directly; the constructors enforce the invariants.
    """

    dist: np.ndarray
    coords: Optional[np.ndarray] = None
    name: str = "instance"
    convention: str = EXACT
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def has_coords(self) -> bool:
        return self.coords is not None

    def require_coords(self) -> np.ndarray:
        if self.coords is None:
            raise CoordinatesRequired(f"{self.name!r} has no coordinates")
        return self.coords

    def __len__(self):
        return self.n

    def __repr__(self):
        kind = "points" if self.has_coords else "matrix"
        return f"Instance(name={self.name!r}, n={self.n}, {kind}, convention={self.convention!r})"


def euclidean_matrix(coords: np.ndarray, convention: str = EXACT) -> np.ndarray:
    coords = np.asarray(coords, dtype=float)
    diff = coords[:, None, :] - coords[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    if convention == EUC_2D:
        dist = np.floor(dist + 0.5)
    elif convention != EXACT:
        raise ValueError(f"unknown distance convention {convention!r}")
    return dist


def instance_from_points(points, name: str = "instance", convention: str = EXACT,
                         meta: Optional[dict] = None) -> Instance:
    """Euclidean instance from an ``(n, 2)`` array-like of coordinates.

    Coincident points are allowed and get distance 0.
    """
    coords = np.asarray(points, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise InstanceError(f"expected an (n, 2) array of points, got shape {coords.shape}")
    if coords.shape[0] < 3:
        raise TooFewPoints(f"need at least 3 points, got {coords.shape[0]}")
    if not np.all(np.isfinite(coords)):
        bad = int(np.flatnonzero(~np.isfinite(coords).all(axis=1))[0])
        raise NonFiniteCoordinate(f"point {bad} has a non-finite coordinate")
    return Instance(dist=_frozen(euclidean_matrix(coords, convention)), coords=_frozen(coords),
                    name=name, convention=convention, meta=dict(meta or {}))


def instance_from_matrix(dist, name: str = "instance", meta: Optional[dict] = None) -> Instance:
    """Instance from an explicit distance matrix (no coordinates).

    Triangle-inequality violations are accepted; insertion costs on such
    instances may be negative.
    """
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise NotSquare(f"distance matrix must be square, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise InstanceError("distance matrix has non-finite entries")
    if not np.array_equal(d, d.T):
        i, j = np.argwhere(d != d.T)[0]
        raise NotSymmetric(f"dist[{i}][{j}]={d[i, j]} but dist[{j}][{i}]={d[j, i]}")
    if np.any(d < 0):
        i, j = np.argwhere(d < 0)[0]
        raise NegativeDistance(f"dist[{i}][{j}]={d[i, j]} is negative")
    if np.any(np.diag(d) != 0):
        raise NonzeroDiagonal("distance matrix diagonal must be zero")
    if d.shape[0] < 3:
        raise TooFewPoints(f"need at least 3 points, got {d.shape[0]}")
    return Instance(dist=_frozen(d), name=name, meta=dict(meta or {}))


def _check_ids(inst: Instance, order: Sequence[int]) -> None:
    for p in order:
        if not 0 <= p < inst.n:
            raise InvalidPointId(f"point id {p} out of range for n={inst.n}")


def tour_length(inst: Instance, tour: Sequence[int]) -> float:
    """Closed length of ``tour``; a 2-point tour counts its edge twice."""
    order = list(tour)
    _check_ids(inst, order)
    if len(order) < 2:
        return 0.0
    d = inst.dist
    total = 0.0
    for k in range(len(order)):
        total += d[order[k - 1], order[k]]
    return float(total)


def tour_edges(tour: Sequence[int]) -> list:
    m = len(tour)
    return [(tour[k], tour[(k + 1) % m]) for k in range(m)]


def validate_tour(inst: Instance, tour: Sequence[int], require_complete: bool = True) -> list:
    """Return a list of human-readable violations; empty means valid."""
    problems = []
    order = list(tour)
    if len(order) < 2:
        problems.append(f"tour has {len(order)} point(s); need at least 2")
    seen = set()
    for p in order:
        if not isinstance(p, (int, np.integer)) or not 0 <= p < inst.n:
            problems.append(f"out-of-range point id {p!r}")
        elif p in seen:
            problems.append(f"duplicate point id {p}")
        seen.add(p)
    if require_complete:
        missing = sorted(set(range(inst.n)) - seen)
        if missing:
            problems.append(f"missing point ids {missing}")
    return problems


def canonical_tour(tour: Sequence[int]) -> Tour:
    """Rotate so the smallest id leads, then take the lexicographically smaller direction."""
    order = [int(p) for p in tour]
    if len(order) < 3:
        return tuple(sorted(order))
    k = order.index(min(order))
    fwd = order[k:] + order[:k]
    bwd = [fwd[0]] + fwd[:0:-1]
    return tuple(min(fwd, bwd))
