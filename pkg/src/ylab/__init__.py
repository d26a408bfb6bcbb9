"""Yatsenko's insertion procedure for the TSP, and tools for probing it.

The adding procedure (max-min and min-min variants) and its cutting
counterpart live in :mod:`ylab.heuristic`; exact oracles in
:mod:`ylab.oracle`; tie enumeration in :mod:`ylab.branching`; crossing
detection in :mod:`ylab.analysis`; fixtures and random families in
:mod:`ylab.generators`.
"""
from .analysis import Crossing, find_crossings, loop_rate_experiment, uncross, untangle
from .branching import BranchReport, enumerate_runs, growth_estimate, tie_profile
from .estimator import ExactTSP, InsertionTSP, check_instance
from .generators import (gen_grid, gen_maxmin_counterexample, gen_minmin_counterexample,
                         gen_random_uniform)
from .heuristic import (DEFAULT_EPS, RunTrace, TieSet, cut_step, disturbance, initial_pair,
                        initial_triangle, inverse_correspondence, maxmin_step, minmin_step,
                        run_adding, run_cutting)
from .instance import (Instance, canonical_tour, instance_from_matrix, instance_from_points,
                       tour_length, validate_tour)
from .oracle import OptimalResult, gap, optimal, optimal_dp, optimal_permutation

__version__ = "0.1.0"

__all__ = [
    "BranchReport", "Crossing", "DEFAULT_EPS", "ExactTSP", "InsertionTSP", "Instance",
    "OptimalResult", "RunTrace", "TieSet", "canonical_tour", "check_instance", "cut_step",
    "disturbance", "enumerate_runs", "find_crossings", "gap", "gen_grid",
    "gen_maxmin_counterexample", "gen_minmin_counterexample", "gen_random_uniform",
    "growth_estimate", "initial_pair", "initial_triangle", "instance_from_matrix",
    "instance_from_points", "inverse_correspondence", "loop_rate_experiment", "maxmin_step",
    "minmin_step", "optimal", "optimal_dp", "optimal_permutation", "run_adding", "run_cutting",
    "tie_profile", "tour_length", "uncross", "untangle", "validate_tour",
]
