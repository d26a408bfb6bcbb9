"""Exhaustive exploration of tie-induced subcases.

Every tie set met during an adding run (initial pair, third point, each
insertion) is resolved every possible way, depth first. Node depth is the
number of points on the partial route minus two, so initial pairs sit at
depth 0, triangles at depth 1 and complete tours at depth ``n - 2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .heuristic import _eps, _step_fn, initial_pair, initial_triangle, run_adding
from .instance import Instance, canonical_tour, tour_length

DEFAULT_MAX_NODES = 10**6


@dataclass
class BranchReport:
    instance: str
    n: int
    variant: str
    eps: float
    nodes_per_depth: list
    leaves: int = 0
    distinct_final_tours: int = 0
    best_final_length: Optional[float] = None
    worst_final_length: Optional[float] = None
    truncated: bool = False
    dedup_enabled: bool = False
    dedup_hits: int = 0
    max_nodes: int = DEFAULT_MAX_NODES
    max_depth: Optional[int] = None
    final_tours: set = field(default_factory=set, repr=False)
    leaf_paths: list = field(default_factory=list, repr=False)

    @property
    def nodes(self) -> int:
        return sum(self.nodes_per_depth)

    @property
    def root_branches(self) -> int:
        """Number of distinct initial triangles reached (depth-1 nodes)."""
        return self.nodes_per_depth[1] if len(self.nodes_per_depth) > 1 else 0

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "n": self.n,
            "variant": self.variant,
            "eps": self.eps,
            "nodes": self.nodes,
            "nodes_per_depth": list(self.nodes_per_depth),
            "root_branches": self.root_branches,
            "leaves": self.leaves,
            "distinct_final_tours": self.distinct_final_tours,
            "best_final_length": self.best_final_length,
            "worst_final_length": self.worst_final_length,
            "truncated": self.truncated,
            "dedup_enabled": self.dedup_enabled,
            "dedup_hits": self.dedup_hits,
            "max_nodes": self.max_nodes,
            "max_depth": self.max_depth,
        }


class _Budget(Exception):
    pass


def enumerate_runs(inst: Instance, variant: str = "maxmin", eps: Optional[float] = None,
                   max_nodes: int = DEFAULT_MAX_NODES, max_depth: Optional[int] = None,
                   dedup: bool = False, keep_paths: bool = False) -> BranchReport:
    """Explore every resolution of every tie set.

    Hitting ``max_nodes`` or ``max_depth`` sets ``truncated`` and returns the
    partial counts. With ``dedup`` on, partial routes equal up to rotation
    and reversal are expanded once; repeats count as ``dedup_hits``. Dedup
    is a pruning extension and is off by default.
    """
    eps = _eps(eps)
    step = _step_fn(variant)
    n = inst.n
    report = BranchReport(instance=inst.name, n=n, variant=variant, eps=eps,
                          nodes_per_depth=[0] * (n - 1), dedup_enabled=dedup,
                          max_nodes=max_nodes, max_depth=max_depth)
    seen = set()

    def admit(state, depth) -> bool:
        if dedup:
            key = canonical_tour(state)
            if key in seen:
                report.dedup_hits += 1
                return False
            seen.add(key)
        if report.nodes >= max_nodes:
            report.truncated = True
            raise _Budget
        report.nodes_per_depth[depth] += 1
        return True

    best = worst = None
    # stack entries: (route, depth, path); children pushed in reverse so the
    # deterministic choice (index 0) is explored first
    stack = []
    try:
        pairs = initial_pair(inst, eps)
        for idx in range(pairs.size):
            if admit(pairs.candidates[idx], 0):
                stack.append((pairs.candidates[idx], 0, (idx,)))
        stack.reverse()
        while stack:
            route, depth, path = stack.pop()
            if len(route) == n:
                report.leaves += 1
                key = canonical_tour(route)
                report.final_tours.add(key)
                length = tour_length(inst, route)
                best = length if best is None else min(best, length)
                worst = length if worst is None else max(worst, length)
                if keep_paths:
                    report.leaf_paths.append((path, route))
                continue
            if max_depth is not None and depth >= max_depth:
                report.truncated = True
                continue
            if len(route) == 2:
                ties = initial_triangle(inst, route, eps)
                children = [route + (c,) for c in ties.candidates]
            else:
                ties = step(inst, route, eps)
                children = [c.apply(route) for c in ties.candidates]
            pending = []
            for idx, child in enumerate(children):
                if admit(child, depth + 1):
                    pending.append((child, depth + 1, path + (idx,)))
            stack.extend(reversed(pending))
    except _Budget:
        pass
    report.distinct_final_tours = len(report.final_tours)
    report.best_final_length = best
    report.worst_final_length = worst
    return report


def tie_profile(inst: Instance, variant: str = "maxmin", eps: Optional[float] = None) -> list:
    """Tie-set sizes along the deterministic run: pair, third point, then each insertion."""
    return run_adding(inst, variant, eps).tie_sizes()


def growth_estimate(reports) -> list:
    """Raw evidence table, one row per report, ordered by instance size."""
    reports = list(reports)
    if len(reports) < 2:
        raise ValueError("need reports for at least two instance sizes")
    rows = []
    for r in sorted(reports, key=lambda r: r.n):
        rows.append({"instance": r.instance, "n": r.n, "nodes": r.nodes, "leaves": r.leaves,
                     "distinct_final_tours": r.distinct_final_tours, "truncated": r.truncated})
    return rows


def format_report(report: BranchReport) -> str:
    lines = [f"instance {report.instance} (n={report.n}), variant {report.variant}, eps {report.eps:g}",
             f"{'depth':>5}  {'points':>6}  {'nodes':>10}"]
    for depth, count in enumerate(report.nodes_per_depth):
        if count:
            lines.append(f"{depth:>5}  {depth + 2:>6}  {count:>10}")
    lines.append(f"root branches: {report.root_branches}")
    lines.append(f"leaves: {report.leaves}  distinct final tours: {report.distinct_final_tours}")
    if report.best_final_length is not None:
        lines.append(f"final length range: {report.best_final_length:.6f} .. {report.worst_final_length:.6f}")
    if report.dedup_enabled:
        lines.append(f"dedup hits: {report.dedup_hits}")
    lines.append("TRUNCATED (limit reached)" if report.truncated else "complete")
    return "\n".join(lines)
