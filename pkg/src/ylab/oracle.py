"""Exact optimal tours for small instances.

Two independent solvers: exhaustive enumeration of canonical tours and the
Held-Karp bitmask dynamic program. Each is the other's cross-check.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .instance import Instance, Tour, tour_length

PERMUTATION_LIMIT = 12
DP_LIMIT = 20


class TooLarge(ValueError):
    pass


class NonPositiveOptimal(ValueError):
    pass


@dataclass(frozen=True)
class OptimalResult:
    tour: Tour
    length: float
    method: str


def _check_size(inst, limit, method):
    if inst.n < 3:
        raise ValueError("need at least 3 points")
    if inst.n > limit:
        raise TooLarge(f"{method} oracle is capped at n={limit}, got n={inst.n}")


def optimal_permutation(inst: Instance, limit: int = PERMUTATION_LIMIT) -> OptimalResult:
    """Scan all (n-1)!/2 tours that start at 0 with ``order[1] < order[-1]``.

    Ties resolve to the lexicographically smallest such tour.
    """
    _check_size(inst, limit, "permutation")
    n = inst.n
    d = inst.dist
    best_len, best_tour = np.inf, None
    # chunk on the second city so each block is at most (n-2)! rows; blocks
    # come in lexicographic order and rows inside a block are lexicographic too
    for second in range(1, n):
        rest = [p for p in range(1, n) if p != second]
        if not rest:
            continue
        perms = np.fromiter(itertools.chain.from_iterable(itertools.permutations(rest)),
                            dtype=np.int64).reshape(-1, n - 2)
        perms = perms[perms[:, -1] > second]
        if perms.size == 0:
            continue
        lengths = d[0, second] + d[second, perms[:, 0]] + d[perms[:, -1], 0]
        for k in range(n - 3):
            lengths = lengths + d[perms[:, k], perms[:, k + 1]]
        low = lengths.min()
        if low < best_len - 1e-12:
            idx = int(np.flatnonzero(lengths <= low + 1e-12)[0])
            best_len = low
            best_tour = (0, second) + tuple(int(p) for p in perms[idx])
    return OptimalResult(best_tour, tour_length(inst, best_tour), "permutation")


def optimal_dp(inst: Instance, limit: int = DP_LIMIT) -> OptimalResult:
    """Held-Karp over subsets of cities 1..n-1, vectorised per subset size."""
    _check_size(inst, limit, "dp")
    n = inst.n
    d = inst.dist
    m = n - 1  # city i+1 <-> bit i
    full = 1 << m
    cost = np.full((full, m), np.inf)
    parent = np.full((full, m), -1, dtype=np.int64)
    for j in range(m):
        cost[1 << j, j] = d[0, j + 1]
    masks = np.arange(full)
    popcount = np.array([bin(x).count("1") for x in range(full)])
    sub = d[1:, 1:]
    for size in range(2, m + 1):
        layer = masks[popcount == size]
        for j in range(m):
            here = layer[(layer >> j) & 1 == 1]
            prev = here ^ (1 << j)
            cand = cost[prev] + sub[:, j][None, :]
            k = np.argmin(cand, axis=1)
            cost[here, j] = cand[np.arange(len(here)), k]
            parent[here, j] = k
    closing = cost[full - 1] + d[1:, 0]
    j = int(np.argmin(closing))
    order = []
    mask = full - 1
    while j >= 0:
        order.append(j + 1)
        prev_j = int(parent[mask, j])
        mask ^= 1 << j
        j = prev_j
    tour = (0,) + tuple(reversed(order))
    return OptimalResult(tour, tour_length(inst, tour), "dp")


def optimal(inst: Instance) -> OptimalResult:
    """Permutation scan when cheap, dynamic program otherwise."""
    if inst.n <= 9:
        return optimal_permutation(inst)
    return optimal_dp(inst)


def gap(heuristic_length: float, optimal_length: float) -> float:
    """Relative excess of a heuristic length over the optimum."""
    if optimal_length <= 0:
        raise NonPositiveOptimal(f"optimal length must be positive, got {optimal_length}")
    return (heuristic_length - optimal_length) / optimal_length
