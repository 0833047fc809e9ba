"""Greedy-by-value heuristic."""

import time

from wdp_triage.models import CAPACITY_TOLERANCE, Allocation, WdpInstance, require_valid
from wdp_triage.solvers.base import SolveResult, Solver, SolverRegistry


def greedy_order(instance: WdpInstance) -> list[int]:
    """Bid positions by decreasing value, ties by ascending bid id."""
    return sorted(range(instance.n), key=lambda i: (-instance.bids[i].value, instance.bids[i].id))


def greedy(instance: WdpInstance) -> SolveResult:
    """Scan bids by decreasing value and accept each that still fits.

    A bid fits when adding its demand to every item it requests keeps all
    loads within capacity. The result is maximal for that scan order.
    """
    require_valid(instance)
    start = time.perf_counter()

    load = {item.id: 0.0 for item in instance.items}
    accepted = [False] * instance.n

    for pos in greedy_order(instance):
        bid = instance.bids[pos]
        if all(
            load[e] + bid.demand <= instance.capacity(e) + CAPACITY_TOLERANCE for e in bid.items
        ):
            accepted[pos] = True
            for e in bid.items:
                load[e] += bid.demand

    allocation = Allocation.from_accepted(instance, accepted)
    return SolveResult(
        allocation=allocation,
        solver_name=GreedySolver.name,
        wall_time=time.perf_counter() - start,
    )


@SolverRegistry.register
class GreedySolver(Solver):
    """Greedy-by-value heuristic; never proves optimality."""

    name = "greedy"

    def solve(self, instance: WdpInstance) -> SolveResult:
        return greedy(instance)
