"""Kinetic maintenance of a randomized treap-based pseudo-triangulation of moving points."""

from .hulltree import PTNode, PTTree, Side, build_static, compute_bridge, verify_treap
from .kds import KineticState, advance, census, extract_triangles, init
from .kernel import EventTime, Sign, collinearity_times, compare_times, isolate_roots, orient, x_swap_times
from .motion import (DegeneracyError, PriorityAssignment, Scenario, Trajectory, draw_priorities, eval_traj,
                     gen_random_scenario, load_scenario, save_scenario)
from .oracle import TriangulationSnapshot, candidate_times, equivalent, static_snapshot
from .poly import Polynomial

__all__ = [
    "PTNode", "PTTree", "Side", "build_static", "compute_bridge", "verify_treap",
    "KineticState", "advance", "census", "extract_triangles", "init",
    "EventTime", "Sign", "collinearity_times", "compare_times", "isolate_roots", "orient", "x_swap_times",
    "DegeneracyError", "PriorityAssignment", "Scenario", "Trajectory", "draw_priorities", "eval_traj",
    "gen_random_scenario", "load_scenario", "save_scenario",
    "TriangulationSnapshot", "candidate_times", "equivalent", "static_snapshot", "Polynomial",
]
