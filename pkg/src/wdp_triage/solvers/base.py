"""Base solver class, result types and solver registry."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, ClassVar

from wdp_triage.errors import SolverError
from wdp_triage.models import Allocation, WdpInstance


@dataclass(frozen=True)
class SolveResult:
    """Outcome of running one solver on one instance."""

    allocation: Allocation
    solver_name: str
    wall_time: float
    node_count: int = 0
    proven_optimal: bool = False

    @property
    def welfare(self) -> float:
        """Welfare of the returned allocation."""
        return self.allocation.welfare

    def to_dict(self, instance: WdpInstance) -> dict[str, Any]:
        """Convert to the solve JSON record."""
        return {
            "solver": self.solver_name,
            "welfare": self.allocation.welfare,
            "accepted": self.allocation.accepted_ids(instance),
            "time_ms": self.wall_time * 1000.0,
            "optimal": self.proven_optimal,
            "node_count": self.node_count,
        }


@dataclass(frozen=True)
class GapReport:
    """Greedy optimality gap against a proven optimum."""

    greedy_gap: float
    optimal_welfare: float
    heuristic_welfare: float

    @property
    def ratio(self) -> float:
        """Heuristic welfare as a fraction of the optimum."""
        if self.optimal_welfare <= 0:
            return 1.0
        return self.heuristic_welfare / self.optimal_welfare

    def to_dict(self) -> dict[str, float]:
        """Convert to dictionary for JSON output."""
        return {
            "greedy_gap": self.greedy_gap,
            "optimal_welfare": self.optimal_welfare,
            "heuristic_welfare": self.heuristic_welfare,
        }


def optimality_gap(optimal: float, achieved: float) -> float:
    """(optimal - achieved) / optimal clamped to [0, 1]; 0 on ties or empty optimum."""
    if optimal <= 0 or achieved == optimal:
        return 0.0
    gap = (optimal - achieved) / optimal
    return min(1.0, max(0.0, gap))


class Solver(ABC):
    """Abstract base class for WDP solvers."""

    # Class attributes to be overridden by subclasses
    name: ClassVar[str] = "unknown"
    proves_optimality: ClassVar[bool] = False  # when the search completes

    def __init__(self, time_limit: float | None = None) -> None:
        """Initialize with an optional wall-clock limit in seconds."""
        self.time_limit = time_limit

    @abstractmethod
    def solve(self, instance: WdpInstance) -> SolveResult:
        """
        Solve an instance.

        Args:
            instance: A valid WDP instance

        Returns:
            SolveResult with a feasible allocation
        """
        pass


class SolverRegistry:
    """Registry of solvers addressable by name."""

    _solvers: ClassVar[list[type[Solver]]] = []

    @classmethod
    def register(cls, solver_class: type[Solver]) -> type[Solver]:
        """
        Register a solver class. Can be used as a decorator.

        Example:
            @SolverRegistry.register
            class MySolver(Solver):
                ...
        """
        if solver_class not in cls._solvers:
            cls._solvers.append(solver_class)
        return solver_class

    @classmethod
    def get(cls, name: str) -> type[Solver]:
        """
        Look up a solver class by name.

        Raises:
            SolverError: If no solver has that name
        """
        for solver_class in cls._solvers:
            if solver_class.name == name:
                return solver_class
        known = ", ".join(s.name for s in cls._solvers)
        raise SolverError(f"unknown solver '{name}' (known: {known})")

    @classmethod
    def get_all_solvers(cls) -> list[type[Solver]]:
        """Get all registered solver classes."""
        return cls._solvers.copy()
