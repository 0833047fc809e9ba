"""Exact depth-first branch-and-bound solver."""

import logging
import sys
import time

from wdp_triage.errors import SolverError
from wdp_triage.models import CAPACITY_TOLERANCE, Allocation, WdpInstance, require_valid
from wdp_triage.solvers.base import SolveResult, Solver, SolverRegistry
from wdp_triage.solvers.greedy import greedy

logger = logging.getLogger(__name__)

DEFAULT_TIME_LIMIT = 10.0

# Wall clock is polled every this many nodes
_CLOCK_STRIDE = 256


def branch_order(instance: WdpInstance) -> list[int]:
    """Bid positions by decreasing value density v_i / c_i."""
    bids = instance.bids
    return sorted(
        range(instance.n),
        key=lambda i: (-bids[i].value / bids[i].demand, -bids[i].value, bids[i].id),
    )


def exact(
    instance: WdpInstance,
    time_limit: float = DEFAULT_TIME_LIMIT,
    node_limit: int | None = None,
) -> SolveResult:
    """Solve to optimality by include/exclude branching.

    Bids are branched in decreasing value density. A node's upper bound is
    its welfare plus the values of every remaining bid that still fits the
    residual capacity on its own; the node is pruned when that bound does
    not beat the incumbent. The greedy allocation seeds the incumbent.

    Args:
        instance: A valid WDP instance
        time_limit: Wall-clock budget in seconds
        node_limit: Optional cap on explored nodes

    Returns:
        SolveResult; proven_optimal is False when a budget ran out first

    Raises:
        SolverError: If a budget is not positive
    """
    if time_limit <= 0:
        raise SolverError(f"time_limit must be positive, got {time_limit}")
    if node_limit is not None and node_limit < 1:
        raise SolverError(f"node_limit must be positive, got {node_limit}")
    require_valid(instance)

    start = time.perf_counter()
    deadline = start + time_limit

    order = branch_order(instance)
    n = len(order)
    values = [instance.bids[p].value for p in order]
    demands = [instance.bids[p].demand for p in order]
    item_sets = [instance.bids[p].items for p in order]
    capacity = {item.id: item.capacity + CAPACITY_TOLERANCE for item in instance.items}
    load = {item.id: 0.0 for item in instance.items}

    suffix = [0.0] * (n + 1)
    for k in range(n - 1, -1, -1):
        suffix[k] = suffix[k + 1] + values[k]

    seed = greedy(instance).allocation
    rank = {pos: k for k, pos in enumerate(order)}
    best_value = seed.welfare
    best_set = [rank[pos] for pos in range(instance.n) if seed.accepted[pos]]

    chosen: list[int] = []
    nodes = 0
    aborted = False

    def fits(k: int) -> bool:
        c = demands[k]
        return all(load[e] + c <= capacity[e] for e in item_sets[k])

    def search(k: int, current: float) -> None:
        nonlocal nodes, aborted, best_value, best_set
        if aborted:
            return
        nodes += 1
        if node_limit is not None and nodes > node_limit:
            aborted = True
            return
        if nodes % _CLOCK_STRIDE == 0 and time.perf_counter() > deadline:
            aborted = True
            return

        if current > best_value:
            best_value = current
            best_set = chosen.copy()
        if k == n or current + suffix[k] <= best_value:
            return

        bound = current + sum(values[q] for q in range(k, n) if fits(q))
        if bound <= best_value:
            return

        if fits(k):
            for e in item_sets[k]:
                load[e] += demands[k]
            chosen.append(k)
            search(k + 1, current + values[k])
            chosen.pop()
            for e in item_sets[k]:
                load[e] -= demands[k]

        search(k + 1, current)

    needed = n + 100
    if sys.getrecursionlimit() < needed:
        sys.setrecursionlimit(needed)
    search(0, 0.0)

    elapsed = time.perf_counter() - start
    if aborted:
        logger.warning(
            "%s: budget exhausted after %d nodes (%.3fs); returning incumbent",
            instance.name or "instance",
            nodes,
            elapsed,
        )
    else:
        logger.debug("%s: proved optimal in %d nodes", instance.name or "instance", nodes)

    allocation = Allocation.from_positions(instance, (order[k] for k in best_set))
    return SolveResult(
        allocation=allocation,
        solver_name=ExactSolver.name,
        wall_time=elapsed,
        node_count=nodes,
        proven_optimal=not aborted,
    )


@SolverRegistry.register
class ExactSolver(Solver):
    """Branch-and-bound; optimal whenever it finishes within budget."""

    name = "exact"
    proves_optimality = True

    def __init__(self, time_limit: float | None = None, node_limit: int | None = None) -> None:
        super().__init__(time_limit)
        self.node_limit = node_limit

    def solve(self, instance: WdpInstance) -> SolveResult:
        return exact(
            instance,
            time_limit=self.time_limit if self.time_limit is not None else DEFAULT_TIME_LIMIT,
            node_limit=self.node_limit,
        )
