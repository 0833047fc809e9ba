"""Whale-fish trap instances with analytic greedy certificates.

A trap is one whale bid requesting every trap item and k fish bids that
split the same items into disjoint blocks. Whenever v_f < v_w < k * v_f,
greedy-by-value takes the whale, which blocks every fish, while the
optimum takes all fish.
"""

import dataclasses
import math
from dataclasses import dataclass

from wdp_triage.errors import ConfigError
from wdp_triage.generators.base import (
    HARD,
    Certificate,
    FamilyRegistry,
    InstanceFamily,
    LabeledInstance,
    TrapConfig,
    int_option,
)
from wdp_triage.models import Bid, Item, WdpInstance


def append_trap(
    items: list[Item],
    bids: list[Bid],
    k: int,
    v_w: float,
    v_f: float,
    m_trap: int,
) -> None:
    """Add one trap on fresh unit-capacity items.

    Trap items are dealt round-robin to the k fish; the whale is emitted
    before its fish so it also wins value ties on bid id.
    """
    first_item = len(items)
    trap_items = list(range(first_item, first_item + m_trap))
    items.extend(Item(id=e, capacity=1.0) for e in trap_items)

    bids.append(Bid(id=len(bids), value=v_w, items=tuple(trap_items), demand=1.0))
    for fish in range(k):
        block = tuple(trap_items[fish::k])
        bids.append(Bid(id=len(bids), value=v_f, items=block, demand=1.0))


def gen_kstar(config: TrapConfig) -> tuple[WdpInstance, Certificate]:
    """The canonical k-star: whale 1 + epsilon against k unit fish.

    Greedy earns 1 + epsilon, the optimum earns k, ratio (1 + epsilon) / k.

    Raises:
        ConfigError: If k < 2, epsilon < 0, 1 + epsilon >= k or m_trap < k
    """
    problems = config.kstar_violations()
    if problems:
        raise ConfigError("invalid k-star config: " + "; ".join(problems))

    whale = 1.0 + config.epsilon
    items: list[Item] = []
    bids: list[Bid] = []
    append_trap(items, bids, config.k, whale, 1.0, config.items_per_trap)

    instance = WdpInstance(
        items=tuple(items),
        bids=tuple(bids),
        name=f"kstar-k{config.k}-eps{config.epsilon:g}",
        seed=config.rng_seed,
    )
    return instance, Certificate.from_welfare(whale, float(config.k))


def gen_trap(config: TrapConfig) -> tuple[WdpInstance, Certificate]:
    """A single trap with arbitrary whale and fish values.

    Raises:
        ConfigError: If k * v_f > v_w > v_f does not hold
    """
    problems = config.violations()
    if problems:
        raise ConfigError("invalid trap config: " + "; ".join(problems))

    items: list[Item] = []
    bids: list[Bid] = []
    append_trap(items, bids, config.k, config.v_w, config.v_f, config.items_per_trap)

    instance = WdpInstance(
        items=tuple(items),
        bids=tuple(bids),
        name=f"trap-k{config.k}-w{config.v_w:g}-f{config.v_f:g}",
        seed=config.rng_seed,
    )
    fish_total = math.fsum([config.v_f] * config.k)
    return instance, Certificate.from_welfare(config.v_w, fish_total)


@dataclass(frozen=True)
class TrapPreset:
    """A named trap configuration; ``traps`` independent copies are composed."""

    k: int
    v_f: float
    v_w: float
    traps: int = 1


# Whale values order the presets by certificate gap
TRAP_PRESETS: dict[str, TrapPreset] = {
    "standard": TrapPreset(k=3, v_f=40.0, v_w=100.0),
    "more_fish": TrapPreset(k=4, v_f=30.0, v_w=98.0),
    "two_whales": TrapPreset(k=5, v_f=30.0, v_w=61.5, traps=2),
    "fewer_fish": TrapPreset(k=2, v_f=55.0, v_w=100.0),
    "high_stakes": TrapPreset(k=4, v_f=45.0, v_w=145.0),
    "tight_margin": TrapPreset(k=3, v_f=35.0, v_w=100.0),
}


def gen_preset(name: str, seed: int = 0) -> tuple[WdpInstance, Certificate]:
    """Compose the named preset's independent traps into one instance.

    Raises:
        ConfigError: If the preset name is unknown
    """
    preset = TRAP_PRESETS.get(name)
    if preset is None:
        known = ", ".join(sorted(TRAP_PRESETS))
        raise ConfigError(f"unknown trap preset '{name}' (known: {known})")

    items: list[Item] = []
    bids: list[Bid] = []
    for _ in range(preset.traps):
        append_trap(items, bids, preset.k, preset.v_w, preset.v_f, preset.k)

    greedy_welfare = math.fsum([preset.v_w] * preset.traps)
    optimal_welfare = math.fsum([preset.v_f] * (preset.k * preset.traps))
    instance = WdpInstance(items=tuple(items), bids=tuple(bids), name=f"preset-{name}", seed=seed)
    return instance, Certificate.from_welfare(greedy_welfare, optimal_welfare)


def _numbered(instance: WdpInstance, i: int, count: int) -> WdpInstance:
    if count == 1:
        return instance
    return dataclasses.replace(instance, name=f"{instance.name}-{i:04d}")


def _trap_config(family: InstanceFamily, seed: int) -> TrapConfig:
    m_trap = family.options.get("m_trap")
    return TrapConfig(
        k=family.int_option("k", 3),
        v_w=family.float_option("v_w", 100.0),
        v_f=family.float_option("v_f", 40.0),
        epsilon=family.float_option("epsilon", 0.0),
        m_trap=None if m_trap is None else int_option("m_trap", m_trap),
        rng_seed=seed,
    )


@FamilyRegistry.register
class KStarFamily(InstanceFamily):
    """k-star instances (options: k, epsilon, m_trap)."""

    family = "kstar"
    description = "whale 1+epsilon against k unit fish"

    def generate(self, count: int, seed: int) -> list[LabeledInstance]:
        out: list[LabeledInstance] = []
        for i in range(count):
            instance, certificate = gen_kstar(_trap_config(self, seed + i))
            instance = _numbered(instance, i, count)
            out.append(LabeledInstance(instance=instance, tag=HARD, certificate=certificate))
        return out


@FamilyRegistry.register
class TrapFamily(InstanceFamily):
    """Single traps (options: k, v_w, v_f, m_trap)."""

    family = "trap"
    description = "one whale-fish trap with k*v_f > v_w > v_f"

    def generate(self, count: int, seed: int) -> list[LabeledInstance]:
        out: list[LabeledInstance] = []
        for i in range(count):
            instance, certificate = gen_trap(_trap_config(self, seed + i))
            instance = _numbered(instance, i, count)
            out.append(LabeledInstance(instance=instance, tag=HARD, certificate=certificate))
        return out


@FamilyRegistry.register
class PresetFamily(InstanceFamily):
    """Named trap presets (option: preset; default emits every preset)."""

    family = "preset"
    description = "named trap configurations, e.g. standard, two_whales"

    def generate(self, count: int, seed: int) -> list[LabeledInstance]:
        names = [self.options["preset"]] if "preset" in self.options else list(TRAP_PRESETS)
        out: list[LabeledInstance] = []
        for i in range(count):
            for name in names:
                instance, certificate = gen_preset(name, seed + i)
                instance = _numbered(instance, i, count)
                out.append(LabeledInstance(instance=instance, tag=HARD, certificate=certificate))
        return out
