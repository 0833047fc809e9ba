"""WDP solvers package."""

from wdp_triage.solvers.base import (
    GapReport,
    SolveResult,
    Solver,
    SolverRegistry,
    optimality_gap,
)
from wdp_triage.solvers.brute_force import BruteForceSolver, brute_force, brute_force_mwis
from wdp_triage.solvers.exact import ExactSolver, exact
from wdp_triage.solvers.gap import greedy_gap
from wdp_triage.solvers.greedy import GreedySolver, greedy

__all__ = [
    "BruteForceSolver",
    "ExactSolver",
    "GapReport",
    "GreedySolver",
    "SolveResult",
    "Solver",
    "SolverRegistry",
    "brute_force",
    "brute_force_mwis",
    "exact",
    "greedy",
    "greedy_gap",
    "optimality_gap",
]
