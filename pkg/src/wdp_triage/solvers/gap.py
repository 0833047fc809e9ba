"""Greedy optimality gap against a proven optimum."""

from wdp_triage.errors import SolverError
from wdp_triage.models import WdpInstance
from wdp_triage.solvers.base import GapReport, SolveResult, optimality_gap
from wdp_triage.solvers.greedy import greedy


def greedy_gap(instance: WdpInstance, reference: SolveResult) -> GapReport:
    """Measure how much welfare greedy forfeits on an instance.

    Args:
        instance: The instance the reference was solved on
        reference: A proven-optimal result (exact or brute force)

    Raises:
        SolverError: If the reference is not proven optimal
    """
    if not reference.proven_optimal:
        raise SolverError(
            f"{instance.name or 'instance'}: gap needs a proven-optimal reference, "
            f"got {reference.solver_name} without proof"
        )
    optimal = reference.allocation.welfare
    heuristic = greedy(instance).allocation.welfare
    return GapReport(
        greedy_gap=optimality_gap(optimal, heuristic),
        optimal_welfare=optimal,
        heuristic_welfare=heuristic,
    )
