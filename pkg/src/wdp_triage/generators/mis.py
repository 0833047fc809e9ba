"""Weighted independent set families, emitted as unit-capacity auctions."""

from itertools import combinations

import numpy as np

from wdp_triage.errors import ConfigError
from wdp_triage.generators.base import (
    EASY,
    HARD,
    Certificate,
    FamilyRegistry,
    InstanceFamily,
    LabeledInstance,
)
from wdp_triage.graph import mwis_to_wdp
from wdp_triage.models import MwisInstance


def gen_star_trap_mis(
    k: int, weight_center: float, weight_leaf: float, seed: int = 0
) -> MwisInstance:
    """Star with one center and k leaves; the seed shuffles node labels.

    Raises:
        ConfigError: If k < 2 or a weight is not positive
    """
    if k < 2:
        raise ConfigError(f"star needs k >= 2 leaves, got {k}")
    if weight_center <= 0 or weight_leaf <= 0:
        raise ConfigError("star weights must be positive")

    labels = np.random.default_rng(seed).permutation(k + 1)
    center = int(labels[0])
    weights = [weight_leaf] * (k + 1)
    weights[center] = weight_center
    edges = [(center, int(leaf)) for leaf in labels[1:]]
    return MwisInstance.from_edges(weights, edges)


def star_certificate(k: int, weight_center: float, weight_leaf: float) -> Certificate | None:
    """Greedy and optimal weight on a star, or None when greedy hits a tie."""
    if weight_center == weight_leaf:
        return None
    greedy_weight = weight_center if weight_center > weight_leaf else k * weight_leaf
    return Certificate.from_welfare(greedy_weight, max(weight_center, k * weight_leaf))


def gen_erdos_renyi_mis(
    n: int,
    p: float,
    weight_low: float = 1.0,
    weight_high: float = 10.0,
    seed: int = 0,
) -> MwisInstance:
    """G(n, p) random graph with uniform weights rounded to cents.

    Raises:
        ConfigError: If n < 1, p is outside [0, 1] or the weight range is bad
    """
    if n < 1:
        raise ConfigError(f"graph needs at least one node, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"edge probability must be in [0, 1], got {p}")
    if not 0 < weight_low <= weight_high:
        raise ConfigError(f"need 0 < weight_low <= weight_high, got [{weight_low}, {weight_high}]")

    rng = np.random.default_rng(seed)
    weights = [round(float(w), 2) for w in rng.uniform(weight_low, weight_high, size=n)]
    pairs = list(combinations(range(n), 2))
    keep = rng.random(len(pairs)) < p
    edges = [pair for pair, kept in zip(pairs, keep) if kept]
    return MwisInstance.from_edges(weights, edges)


@FamilyRegistry.register
class StarMisFamily(InstanceFamily):
    """Star traps as auctions (options: k, weight_center, weight_leaf)."""

    family = "star_mis"
    description = "star-graph independent set traps converted to auctions"

    def generate(self, count: int, seed: int) -> list[LabeledInstance]:
        k = self.int_option("k", 5)
        center = self.float_option("weight_center", 1.01)
        leaf = self.float_option("weight_leaf", 1.0)
        certificate = star_certificate(k, center, leaf)
        tag = HARD if certificate and certificate.analytic_ratio < 1 else EASY

        out: list[LabeledInstance] = []
        for i in range(count):
            mwis = gen_star_trap_mis(k, center, leaf, seed + i)
            instance = mwis_to_wdp(mwis, name=f"star-{seed}-{i:04d}", seed=seed + i)
            out.append(LabeledInstance(instance=instance, tag=tag, certificate=certificate))
        return out


@FamilyRegistry.register
class ErdosRenyiMisFamily(InstanceFamily):
    """Random graphs as auctions (options: n, p, weight_low, weight_high)."""

    family = "er_mis"
    description = "Erdos-Renyi independent set instances converted to auctions"

    def generate(self, count: int, seed: int) -> list[LabeledInstance]:
        n = self.int_option("n", 20)
        p = self.float_option("p", 0.3)
        low = self.float_option("weight_low", 1.0)
        high = self.float_option("weight_high", 10.0)

        out: list[LabeledInstance] = []
        for i in range(count):
            mwis = gen_erdos_renyi_mis(n, p, low, high, seed + i)
            instance = mwis_to_wdp(mwis, name=f"er-{seed}-{i:04d}", seed=seed + i)
            out.append(LabeledInstance(instance=instance, tag=EASY))
        return out
