"""Generator configs, labeled instances and the instance family registry."""

import dataclasses
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, ClassVar

import numpy as np

from wdp_triage.errors import ConfigError
from wdp_triage.models import WdpInstance

HARD = "hard"
EASY = "easy"
TAGS = (HARD, EASY)


@dataclass(frozen=True)
class TrapConfig:
    """One whale-fish trap: a whale on all trap items, k fish splitting them."""

    k: int = 3
    v_w: float = 100.0
    v_f: float = 40.0
    epsilon: float = 0.0  # k-star tie margin, whale = 1 + epsilon
    m_trap: int | None = None  # defaults to k
    rng_seed: int = 0

    @property
    def items_per_trap(self) -> int:
        """Number of items the trap spans."""
        return self.m_trap if self.m_trap is not None else self.k

    def _shape_violations(self) -> list[str]:
        problems: list[str] = []
        if self.k < 2:
            problems.append(f"k must be at least 2, got {self.k}")
        if self.items_per_trap < self.k:
            problems.append(
                f"m_trap={self.items_per_trap} cannot be partitioned among k={self.k} fish"
            )
        return problems

    def kstar_violations(self) -> list[str]:
        """Constraints that apply in k-star mode (v_w = 1 + epsilon, v_f = 1)."""
        problems = self._shape_violations()
        if self.epsilon < 0:
            problems.append(f"epsilon must be non-negative, got {self.epsilon}")
        if not 1 + self.epsilon < self.k:
            problems.append(
                f"whale value 1+epsilon={1 + self.epsilon} must stay below k={self.k}"
            )
        return problems

    def violations(self) -> list[str]:
        """Constraints for a general trap (k * v_f > v_w > v_f)."""
        problems = self._shape_violations()
        if not self.v_f > 0:
            problems.append(f"v_f must be positive, got {self.v_f}")
        if not self.v_w > self.v_f:
            problems.append(f"v_w={self.v_w} must exceed v_f={self.v_f}")
        if not self.k * self.v_f > self.v_w:
            problems.append(f"k*v_f={self.k * self.v_f} must exceed v_w={self.v_w}")
        return problems


@dataclass(frozen=True)
class MixConfig:
    """Parameters for a mixed hard/easy dataset."""

    n_hard: int = 50
    n_easy: int = 50
    n_traps: int = 3
    k_min: int = 2
    k_max: int = 6
    items_per_fish: int = 2
    fish_value_low: float = 20.0
    fish_value_high: float = 60.0
    whale_ratio_low: float = 0.55  # v_w / (k * v_f)
    whale_ratio_high: float = 0.85
    filler_count: int = 3
    filler_ratio_low: float = 0.05  # filler value / reference fish value
    filler_ratio_high: float = 0.5
    n_items: int = 64
    easy_bids: int = 40
    easy_items: int = 80
    easy_capacity: float = 2.0
    easy_items_min: int = 1
    easy_items_max: int = 4
    rng_seed: int = 0

    @property
    def max_hard_items(self) -> int:
        """Items needed by the largest possible hard instance."""
        return self.n_traps * self.k_max * self.items_per_fish + 2 * self.filler_count

    def violations(self) -> list[str]:
        """Check counts, ranges and the item budget."""
        problems: list[str] = []
        counts = {
            "n_hard": self.n_hard,
            "n_easy": self.n_easy,
            "n_traps": self.n_traps,
            "filler_count": self.filler_count,
            "easy_bids": self.easy_bids,
        }
        for key, value in counts.items():
            if value < 0:
                problems.append(f"{key} must be non-negative, got {value}")
        if self.k_min < 2 or self.k_max < self.k_min:
            problems.append(f"need 2 <= k_min <= k_max, got {self.k_min}..{self.k_max}")
        if self.items_per_fish < 1:
            problems.append(f"items_per_fish must be positive, got {self.items_per_fish}")
        ranges = {
            "fish_value": (self.fish_value_low, self.fish_value_high),
            "filler_ratio": (self.filler_ratio_low, self.filler_ratio_high),
        }
        for key, (low, high) in ranges.items():
            if not 0 < low <= high:
                problems.append(f"{key} range needs 0 < low <= high, got [{low}, {high}]")
        if not (self.whale_ratio_low * self.k_min > 1 and self.whale_ratio_high < 1):
            problems.append(
                "whale ratio range must keep v_f < v_w < k*v_f "
                f"(low*k_min > 1 and high < 1), got [{self.whale_ratio_low}, "
                f"{self.whale_ratio_high}]"
            )
        if self.whale_ratio_high < self.whale_ratio_low:
            problems.append("whale_ratio_high must not be below whale_ratio_low")
        if self.easy_bids > 0:
            if self.easy_capacity <= 0:
                problems.append(f"easy_capacity must be positive, got {self.easy_capacity}")
            if not 1 <= self.easy_items_min <= self.easy_items_max <= self.easy_items:
                problems.append(
                    "need 1 <= easy_items_min <= easy_items_max <= easy_items, got "
                    f"{self.easy_items_min}..{self.easy_items_max} of {self.easy_items}"
                )
        if self.n_hard > 0 and self.n_traps + self.filler_count == 0:
            problems.append("hard instances need at least one trap or filler bid")
        if self.n_easy > 0 and self.easy_bids == 0:
            problems.append("easy instances need at least one bid")
        if self.n_hard > 0 and self.max_hard_items > self.n_items:
            problems.append(
                f"item pool too small: traps and filler need up to {self.max_hard_items} "
                f"items, n_items={self.n_items}"
            )
        return problems


@dataclass(frozen=True)
class Certificate:
    """Analytic greedy and optimal welfare of a generated trap instance."""

    greedy_welfare: float
    optimal_welfare: float
    analytic_ratio: float

    @classmethod
    def from_welfare(cls, greedy_welfare: float, optimal_welfare: float) -> "Certificate":
        """Derive the ratio from the two welfare values."""
        return cls(
            greedy_welfare=greedy_welfare,
            optimal_welfare=optimal_welfare,
            analytic_ratio=greedy_welfare / optimal_welfare,
        )

    @property
    def gap(self) -> float:
        """Greedy gap implied by the certificate."""
        return (self.optimal_welfare - self.greedy_welfare) / self.optimal_welfare

    def to_dict(self) -> dict[str, float]:
        """Convert to dictionary for the label sidecar."""
        return {
            "greedy_welfare": self.greedy_welfare,
            "optimal_welfare": self.optimal_welfare,
            "analytic_ratio": self.analytic_ratio,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Certificate":
        """Build from a label sidecar record."""
        return cls(
            greedy_welfare=float(data["greedy_welfare"]),
            optimal_welfare=float(data["optimal_welfare"]),
            analytic_ratio=float(data["analytic_ratio"]),
        )


@dataclass(frozen=True)
class LabeledInstance:
    """An instance with its ground-truth tag and, once solved, its labels."""

    instance: WdpInstance
    tag: str | None = None
    certificate: Certificate | None = None
    greedy_gap: float | None = None
    optimal_welfare: float | None = None
    greedy_welfare: float | None = None
    proven_optimal: bool | None = None

    @property
    def name(self) -> str:
        """Instance name."""
        return self.instance.name

    @property
    def is_labeled(self) -> bool:
        """True once an exact solve has filled in the gap."""
        return self.greedy_gap is not None and self.optimal_welfare is not None

    def with_labels(
        self,
        greedy_gap: float,
        optimal_welfare: float,
        greedy_welfare: float,
        proven_optimal: bool,
    ) -> "LabeledInstance":
        """Copy with solver labels attached."""
        return dataclasses.replace(
            self,
            greedy_gap=greedy_gap,
            optimal_welfare=optimal_welfare,
            greedy_welfare=greedy_welfare,
            proven_optimal=proven_optimal,
        )

    def label_dict(self) -> dict[str, Any]:
        """Convert to the label sidecar document."""
        return {
            "greedy_gap": self.greedy_gap,
            "tag": self.tag,
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "optimal_welfare": self.optimal_welfare,
            "greedy_welfare": self.greedy_welfare,
            "proven_optimal": self.proven_optimal,
        }

    @classmethod
    def from_documents(
        cls, instance: WdpInstance, label: dict[str, Any] | None
    ) -> "LabeledInstance":
        """Rebuild from an instance and its (optional) label sidecar."""
        if label is None:
            return cls(instance=instance)
        certificate = label.get("certificate")
        return cls(
            instance=instance,
            tag=label.get("tag"),
            certificate=Certificate.from_dict(certificate) if certificate else None,
            greedy_gap=_optional_float(label.get("greedy_gap")),
            optimal_welfare=_optional_float(label.get("optimal_welfare")),
            greedy_welfare=_optional_float(label.get("greedy_welfare")),
            proven_optimal=label.get("proven_optimal"),
        )


def _optional_float(value: Any) -> float | None:
    return None if value is None else float(value)


def int_option(key: str, raw: Any) -> int:
    """Read an integer option; integral floats and digit strings are accepted.

    Raises:
        ConfigError: If the value is not a whole number
    """
    if isinstance(raw, int) and not isinstance(raw, bool):
        return raw
    if isinstance(raw, float) and raw.is_integer():
        return int(raw)
    if isinstance(raw, str):
        try:
            return int(raw.strip())
        except ValueError:
            pass
    raise ConfigError(f"'{key}' must be an integer, got {raw!r}")


def float_option(key: str, raw: Any) -> float:
    """Read a numeric option.

    Raises:
        ConfigError: If the value is not a number
    """
    if isinstance(raw, bool):
        raise ConfigError(f"'{key}' must be a number, got {raw!r}")
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"'{key}' must be a number, got {raw!r}") from None


def spawn_seeds(seed: int, count: int) -> list[int]:
    """Independent per-instance seeds derived from one run seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


class InstanceFamily(ABC):
    """Abstract base class for a named instance family."""

    # Class attributes to be overridden by subclasses
    family: ClassVar[str] = "unknown"
    description: ClassVar[str] = ""

    def __init__(self, options: dict[str, Any] | None = None) -> None:
        """Initialize with family-specific options (unset keys take defaults)."""
        self.options = {k: v for k, v in (options or {}).items() if v is not None}

    def int_option(self, key: str, default: int) -> int:
        """Integer option or its default."""
        return int_option(key, self.options[key]) if key in self.options else default

    def float_option(self, key: str, default: float) -> float:
        """Numeric option or its default."""
        return float_option(key, self.options[key]) if key in self.options else default

    @abstractmethod
    def generate(self, count: int, seed: int) -> list[LabeledInstance]:
        """
        Generate instances.

        Args:
            count: Number of instances (families may round to their own unit)
            seed: Run seed; the output is a pure function of options and seed

        Returns:
            List of tagged instances
        """
        pass


class FamilyRegistry:
    """Registry for instance families addressable by name."""

    _families: ClassVar[list[type[InstanceFamily]]] = []

    @classmethod
    def register(cls, family_class: type[InstanceFamily]) -> type[InstanceFamily]:
        """
        Register a family class. Can be used as a decorator.

        Example:
            @FamilyRegistry.register
            class MyFamily(InstanceFamily):
                ...
        """
        if family_class not in cls._families:
            cls._families.append(family_class)
        return family_class

    @classmethod
    def get(cls, name: str) -> type[InstanceFamily]:
        """
        Look up a family by name.

        Raises:
            ConfigError: If the family is unknown
        """
        for family_class in cls._families:
            if family_class.family == name:
                return family_class
        known = ", ".join(f.family for f in cls._families)
        raise ConfigError(f"unknown family '{name}' (known: {known})")

    @classmethod
    def get_all_families(cls) -> list[type[InstanceFamily]]:
        """Get all registered family classes."""
        return cls._families.copy()
