"""Exhaustive enumeration oracles for small instances."""

import math
import time

import numpy as np

from wdp_triage.errors import SolverError
from wdp_triage.models import (
    CAPACITY_TOLERANCE,
    Allocation,
    MwisInstance,
    WdpInstance,
    require_valid,
    require_valid_mwis,
)
from wdp_triage.solvers.base import SolveResult, Solver, SolverRegistry

MAX_BRUTE_FORCE_BIDS = 25

# Subsets scored per vectorized block
_CHUNK = 1 << 15


def _subset_blocks(n: int) -> list[tuple[int, int]]:
    total = 1 << n
    return [(lo, min(lo + _CHUNK, total)) for lo in range(0, total, _CHUNK)]


def _membership(lo: int, hi: int, n: int) -> np.ndarray:
    """Rows are subsets lo..hi-1 as 0/1 vectors over n elements."""
    masks = np.arange(lo, hi, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.float64)


def brute_force(instance: WdpInstance) -> SolveResult:
    """Enumerate all 2^n acceptance vectors and keep the best feasible one.

    Raises:
        SolverError: If the instance has more than 25 bids
    """
    require_valid(instance)
    n = instance.n
    if n > MAX_BRUTE_FORCE_BIDS:
        raise SolverError(f"brute force refuses {n} bids (limit {MAX_BRUTE_FORCE_BIDS})")

    start = time.perf_counter()
    column = {item.id: col for col, item in enumerate(instance.items)}
    demand = np.zeros((n, instance.m))
    for row, bid in enumerate(instance.bids):
        for e in bid.items:
            demand[row, column[e]] = bid.demand
    capacity = np.array([item.capacity for item in instance.items]) + CAPACITY_TOLERANCE
    values = np.array([bid.value for bid in instance.bids])

    best_mask = 0
    best_welfare = 0.0
    for lo, hi in _subset_blocks(n):
        chosen = _membership(lo, hi, n)
        feasible = np.all(chosen @ demand <= capacity, axis=1)
        welfare = np.where(feasible, chosen @ values, -np.inf)
        idx = int(np.argmax(welfare))
        if welfare[idx] > best_welfare:
            best_welfare = float(welfare[idx])
            best_mask = lo + idx

    allocation = Allocation.from_accepted(
        instance, [bool((best_mask >> i) & 1) for i in range(n)]
    )
    return SolveResult(
        allocation=allocation,
        solver_name=BruteForceSolver.name,
        wall_time=time.perf_counter() - start,
        node_count=1 << n,
        proven_optimal=True,
    )


def brute_force_mwis(mwis: MwisInstance) -> tuple[float, tuple[int, ...]]:
    """Maximum weight independent set by enumeration.

    Returns:
        (optimum weight, sorted node indices of one optimal set)

    Raises:
        SolverError: If the graph has more than 25 nodes
        InvalidInstanceError: If the graph is malformed
    """
    n = mwis.n
    if n > MAX_BRUTE_FORCE_BIDS:
        raise SolverError(f"brute force refuses {n} nodes (limit {MAX_BRUTE_FORCE_BIDS})")
    require_valid_mwis(mwis)
    if n == 0:
        return 0.0, ()

    weights = np.array(mwis.weights)
    heads = np.array([i for i, _ in mwis.edges], dtype=np.int64)
    tails = np.array([j for _, j in mwis.edges], dtype=np.int64)

    best_mask = 0
    best_weight = 0.0
    for lo, hi in _subset_blocks(n):
        chosen = _membership(lo, hi, n)
        if len(heads):
            independent = ~np.any((chosen[:, heads] * chosen[:, tails]) > 0, axis=1)
        else:
            independent = np.ones(hi - lo, dtype=bool)
        weight = np.where(independent, chosen @ weights, -np.inf)
        idx = int(np.argmax(weight))
        if weight[idx] > best_weight:
            best_weight = float(weight[idx])
            best_mask = lo + idx

    nodes = tuple(i for i in range(n) if (best_mask >> i) & 1)
    return math.fsum(mwis.weights[i] for i in nodes), nodes


@SolverRegistry.register
class BruteForceSolver(Solver):
    """Exhaustive oracle for instances with at most 25 bids."""

    name = "brute_force"
    proves_optimality = True

    def solve(self, instance: WdpInstance) -> SolveResult:
        return brute_force(instance)
