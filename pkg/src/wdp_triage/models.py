"""Data models for winner-determination instances."""

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any

from wdp_triage.errors import InvalidInstanceError

# Absolute slack when comparing item loads against capacities
CAPACITY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Item:
    """A resource with a positive capacity C_e."""

    id: int
    capacity: float = 1.0


@dataclass(frozen=True)
class Bid:
    """A single-minded bid: value v_i for the whole item set E_i at demand c_i."""

    id: int
    value: float
    items: tuple[int, ...]
    demand: float = 1.0

    def __post_init__(self) -> None:
        """Store item sets as tuples so bids stay hashable."""
        if not isinstance(self.items, tuple):
            object.__setattr__(self, "items", tuple(self.items))

    def to_dict(self) -> dict[str, Any]:
        """Convert to the instance JSON bid record."""
        return {
            "id": self.id,
            "value": self.value,
            "items": list(self.items),
            "demand": self.demand,
        }


@dataclass(frozen=True)
class WdpInstance:
    """Items with capacities plus the bids competing for them."""

    items: tuple[Item, ...]
    bids: tuple[Bid, ...]
    name: str = ""
    seed: int = 0
    _capacity: dict[int, float] = field(
        default_factory=dict, init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if not isinstance(self.items, tuple):
            object.__setattr__(self, "items", tuple(self.items))
        if not isinstance(self.bids, tuple):
            object.__setattr__(self, "bids", tuple(self.bids))
        self._capacity.update({item.id: item.capacity for item in self.items})

    @property
    def n(self) -> int:
        """Number of bids."""
        return len(self.bids)

    @property
    def m(self) -> int:
        """Number of items."""
        return len(self.items)

    def capacity(self, item_id: int) -> float:
        """Capacity of an item by id."""
        return self._capacity[item_id]

    def to_dict(self) -> dict[str, Any]:
        """Convert to the instance JSON document."""
        return {
            "name": self.name,
            "seed": self.seed,
            "items": [{"id": item.id, "capacity": item.capacity} for item in self.items],
            "bids": [bid.to_dict() for bid in self.bids],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "WdpInstance":
        """Build an instance from its JSON document.

        Raises:
            InvalidInstanceError: If required keys are missing or mistyped
        """
        try:
            items = tuple(
                Item(id=int(raw["id"]), capacity=float(raw["capacity"]))
                for raw in data["items"]
            )
            bids = tuple(
                Bid(
                    id=int(raw["id"]),
                    value=float(raw["value"]),
                    items=tuple(int(e) for e in raw["items"]),
                    demand=float(raw.get("demand", 1.0)),
                )
                for raw in data["bids"]
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInstanceError(f"malformed instance document: {e!r}") from e

        return cls(
            items=items,
            bids=bids,
            name=str(data.get("name", "")),
            seed=int(data.get("seed", 0)),
        )


def item_loads(instance: WdpInstance, accepted: Sequence[bool]) -> dict[int, float]:
    """Sum of accepted demand on every item."""
    loads = {item.id: 0.0 for item in instance.items}
    for bid, take in zip(instance.bids, accepted, strict=True):
        if take:
            for e in bid.items:
                loads[e] += bid.demand
    return loads


@dataclass(frozen=True)
class Allocation:
    """Binary acceptance vector x over the instance's bids."""

    accepted: tuple[bool, ...]
    welfare: float
    feasible: bool

    @classmethod
    def from_accepted(cls, instance: WdpInstance, accepted: Sequence[bool]) -> "Allocation":
        """Score an acceptance vector against an instance."""
        if len(accepted) != instance.n:
            raise InvalidInstanceError(
                f"allocation has {len(accepted)} entries for {instance.n} bids"
            )
        flags = tuple(bool(x) for x in accepted)
        welfare = math.fsum(bid.value for bid, take in zip(instance.bids, flags) if take)
        loads = item_loads(instance, flags)
        feasible = all(
            loads[item.id] <= item.capacity + CAPACITY_TOLERANCE for item in instance.items
        )
        return cls(accepted=flags, welfare=welfare, feasible=feasible)

    @classmethod
    def from_positions(cls, instance: WdpInstance, positions: Iterable[int]) -> "Allocation":
        """Score the allocation accepting the bids at the given list positions."""
        chosen = set(positions)
        return cls.from_accepted(instance, [i in chosen for i in range(instance.n)])

    def accepted_ids(self, instance: WdpInstance) -> list[int]:
        """Ids of the accepted bids, in instance order."""
        return [bid.id for bid, take in zip(instance.bids, self.accepted) if take]


@dataclass(frozen=True)
class MwisInstance:
    """Node-weighted undirected simple graph."""

    weights: tuple[float, ...]
    edges: tuple[tuple[int, int], ...]

    @property
    def n(self) -> int:
        """Number of nodes."""
        return len(self.weights)

    @classmethod
    def from_edges(
        cls, weights: Sequence[float], edges: Iterable[tuple[int, int]]
    ) -> "MwisInstance":
        """Normalize edges to sorted (low, high) pairs.

        Raises:
            InvalidInstanceError: On self-loops or duplicate edges
        """
        normalized: list[tuple[int, int]] = []
        seen: set[tuple[int, int]] = set()
        for i, j in edges:
            if i == j:
                raise InvalidInstanceError(f"self-loop on node {i}")
            pair = (min(i, j), max(i, j))
            if pair in seen:
                raise InvalidInstanceError(f"duplicate edge {pair}")
            seen.add(pair)
            normalized.append(pair)
        return cls(weights=tuple(float(w) for w in weights), edges=tuple(sorted(normalized)))


def validate(instance: WdpInstance) -> list[str]:
    """Check every instance invariant.

    Returns:
        One message per violation, naming the offending bid or item.
        Empty when the instance is well formed.
    """
    violations: list[str] = []

    if instance.m < 1:
        violations.append("instance has no items")
    if instance.n < 1:
        violations.append("instance has no bids")

    item_ids: set[int] = set()
    for item in instance.items:
        if item.id in item_ids:
            violations.append(f"item {item.id}: duplicate id")
        item_ids.add(item.id)
        if not math.isfinite(item.capacity) or item.capacity <= 0:
            violations.append(f"item {item.id}: capacity must be positive, got {item.capacity}")

    bid_ids: set[int] = set()
    for bid in instance.bids:
        if bid.id in bid_ids:
            violations.append(f"bid {bid.id}: duplicate id")
        bid_ids.add(bid.id)
        if not math.isfinite(bid.value) or bid.value <= 0:
            violations.append(f"bid {bid.id}: value must be positive, got {bid.value}")
        if not math.isfinite(bid.demand) or bid.demand <= 0:
            violations.append(f"bid {bid.id}: demand must be positive, got {bid.demand}")
        if not bid.items:
            violations.append(f"bid {bid.id}: empty item set")
        if len(set(bid.items)) != len(bid.items):
            violations.append(f"bid {bid.id}: duplicate items in item set")
        unknown = sorted(set(bid.items) - item_ids)
        if unknown:
            violations.append(f"bid {bid.id}: references unknown items {unknown}")

    return violations


def require_valid(instance: WdpInstance) -> None:
    """Raise if the instance violates any invariant.

    Raises:
        InvalidInstanceError: Listing every violation
    """
    violations = validate(instance)
    if violations:
        label = instance.name or "instance"
        raise InvalidInstanceError(f"{label}: " + "; ".join(violations))


def validate_mwis(mwis: MwisInstance) -> list[str]:
    """Check the MWIS invariants (positive weights, simple graph)."""
    violations: list[str] = []
    for node, w in enumerate(mwis.weights):
        if not math.isfinite(w) or w <= 0:
            violations.append(f"node {node}: weight must be positive, got {w}")
    seen: set[tuple[int, int]] = set()
    for i, j in mwis.edges:
        if i == j:
            violations.append(f"edge ({i}, {j}): self-loop")
        if not (0 <= i < mwis.n and 0 <= j < mwis.n):
            violations.append(f"edge ({i}, {j}): node out of range")
        pair = (min(i, j), max(i, j))
        if pair in seen:
            violations.append(f"edge {pair}: duplicate")
        seen.add(pair)
    return violations


def require_valid_mwis(mwis: MwisInstance) -> None:
    """Raise if the graph violates any MWIS invariant.

    Raises:
        InvalidInstanceError: Listing every violation
    """
    violations = validate_mwis(mwis)
    if violations:
        raise InvalidInstanceError("graph: " + "; ".join(violations))
