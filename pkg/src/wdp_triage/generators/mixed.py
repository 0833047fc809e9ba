"""Mixed hard/easy datasets for training and routing.

Hard instances embed several independent traps on disjoint item blocks
plus low-value filler bids on a separate pool. Easy instances are random
bids over a shared pool with spare capacity.
"""

import logging
import math
from typing import Any

import numpy as np

from wdp_triage.errors import ConfigError
from wdp_triage.generators.base import (
    EASY,
    HARD,
    Certificate,
    FamilyRegistry,
    InstanceFamily,
    LabeledInstance,
    MixConfig,
    float_option,
    int_option,
    spawn_seeds,
)
from wdp_triage.generators.traps import append_trap
from wdp_triage.models import Bid, Item, WdpInstance

logger = logging.getLogger(__name__)


def _money(x: float) -> float:
    return round(float(x), 2)


def _filler_value(rng: np.random.Generator, config: MixConfig, reference: float) -> float:
    ratio = rng.uniform(config.filler_ratio_low, config.filler_ratio_high)
    return max(_money(ratio * reference), 0.01)


def gen_hard(config: MixConfig, seed: int, name: str) -> LabeledInstance:
    """One multi-trap instance; certified only when it carries no filler."""
    rng = np.random.default_rng(seed)
    items: list[Item] = []
    bids: list[Bid] = []
    whales: list[float] = []
    fish_totals: list[float] = []
    fish_values: list[float] = []

    for _ in range(config.n_traps):
        k = int(rng.integers(config.k_min, config.k_max + 1))
        v_f = _money(rng.uniform(config.fish_value_low, config.fish_value_high))
        ratio = rng.uniform(config.whale_ratio_low, config.whale_ratio_high)
        v_w = _money(ratio * k * v_f)
        append_trap(items, bids, k, v_w, v_f, k * config.items_per_fish)
        whales.append(v_w)
        fish_values.append(v_f)
        fish_totals.extend([v_f] * k)

    if fish_values:
        reference = math.fsum(fish_values) / len(fish_values)
    else:
        reference = float(rng.uniform(config.fish_value_low, config.fish_value_high))
    pool_start = len(items)
    pool_size = 2 * config.filler_count
    for _ in range(config.filler_count):
        size = int(rng.integers(1, 3))
        chosen = sorted(int(e) for e in rng.choice(pool_size, size=size, replace=False))
        value = _filler_value(rng, config, reference)
        block = tuple(pool_start + e for e in chosen)
        bids.append(Bid(id=len(bids), value=value, items=block, demand=1.0))

    items.extend(Item(id=e, capacity=1.0) for e in range(pool_start, config.n_items))

    certificate = None
    if config.filler_count == 0 and config.n_traps > 0:
        certificate = Certificate.from_welfare(math.fsum(whales), math.fsum(fish_totals))

    instance = WdpInstance(items=tuple(items), bids=tuple(bids), name=name, seed=seed)
    return LabeledInstance(instance=instance, tag=HARD, certificate=certificate)


def gen_easy(config: MixConfig, seed: int, name: str) -> LabeledInstance:
    """One random instance with heterogeneous item demand."""
    rng = np.random.default_rng(seed)
    reference = float(rng.uniform(config.fish_value_low, config.fish_value_high))
    bids: list[Bid] = []
    for bid_id in range(config.easy_bids):
        size = int(rng.integers(config.easy_items_min, config.easy_items_max + 1))
        chosen = sorted(int(e) for e in rng.choice(config.easy_items, size=size, replace=False))
        value = _filler_value(rng, config, reference)
        bids.append(Bid(id=bid_id, value=value, items=tuple(chosen), demand=1.0))

    items = tuple(Item(id=e, capacity=config.easy_capacity) for e in range(config.easy_items))
    instance = WdpInstance(items=items, bids=tuple(bids), name=name, seed=seed)
    return LabeledInstance(instance=instance, tag=EASY)


def gen_mixed(config: MixConfig) -> list[LabeledInstance]:
    """Generate ``n_hard`` trap instances followed by ``n_easy`` random ones.

    Each instance gets its own seed spawned from ``config.rng_seed``, so the
    output is a pure function of the config.

    Raises:
        ConfigError: If the config is invalid, including an item pool too
            small for the largest trap draw
    """
    problems = config.violations()
    if problems:
        raise ConfigError("invalid mix config: " + "; ".join(problems))

    seeds = spawn_seeds(config.rng_seed, config.n_hard + config.n_easy)
    out: list[LabeledInstance] = []
    for i in range(config.n_hard):
        out.append(gen_hard(config, seeds[i], f"hard-{config.rng_seed}-{i:04d}"))
    for i in range(config.n_easy):
        seed = seeds[config.n_hard + i]
        out.append(gen_easy(config, seed, f"easy-{config.rng_seed}-{i:04d}"))

    logger.debug(
        "generated %d hard + %d easy instances (seed %d)",
        config.n_hard,
        config.n_easy,
        config.rng_seed,
    )
    return out


def mix_config_from_options(options: dict[str, Any], seed: int) -> MixConfig:
    """Build a MixConfig from loose option values.

    Raises:
        ConfigError: On unknown option names or values of the wrong type
    """
    fields = MixConfig.__dataclass_fields__
    unknown = sorted(set(options) - set(fields))
    if unknown:
        raise ConfigError(f"unknown mix option(s): {', '.join(unknown)}")

    values: dict[str, Any] = {}
    for key, raw in options.items():
        if isinstance(getattr(MixConfig, key), int):
            values[key] = int_option(key, raw)
        else:
            values[key] = float_option(key, raw)
    values["rng_seed"] = seed
    return MixConfig(**values)


@FamilyRegistry.register
class MixedFamily(InstanceFamily):
    """Hard trap instances plus easy random ones.

    ``count`` is split evenly (hard gets the odd one) unless ``n_hard`` or
    ``n_easy`` is given explicitly.
    """

    family = "mixed"
    description = "multi-trap hard instances and random easy instances"

    def generate(self, count: int, seed: int) -> list[LabeledInstance]:
        options = dict(self.options)
        if "n_hard" not in options and "n_easy" not in options:
            options["n_hard"] = count - count // 2
            options["n_easy"] = count // 2
        return gen_mixed(mix_config_from_options(options, seed))
