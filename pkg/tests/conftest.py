"""Pytest configuration and fixtures."""

from collections.abc import Callable

import numpy as np
import pytest

from wdp_triage.generators import MixConfig, TrapConfig, gen_kstar, gen_mixed, gen_trap
from wdp_triage.generators.base import LabeledInstance
from wdp_triage.hardness import HardnessDataset, HardnessModel, TrainConfig, train
from wdp_triage.hardness.dataset import train_test_split
from wdp_triage.models import Bid, Item, MwisInstance, WdpInstance
from wdp_triage.pipeline import build_dataset, label_dataset

# Small mixed distribution shared by the model and router fixtures
SMALL_MIX = MixConfig(n_hard=60, n_easy=60, rng_seed=11)

QUICK_TRAIN = TrainConfig(max_epochs=40, patience=8, rng_seed=42)


@pytest.fixture
def kstar_instance() -> WdpInstance:
    """k-star with k=3 and epsilon=0.01."""
    instance, _ = gen_kstar(TrapConfig(k=3, epsilon=0.01))
    return instance


@pytest.fixture
def trap_instance() -> WdpInstance:
    """Single trap: whale 100 against three fish of 40."""
    instance, _ = gen_trap(TrapConfig(k=3, v_w=100.0, v_f=40.0))
    return instance


@pytest.fixture
def triangle_mwis() -> MwisInstance:
    """Triangle with weights 1, 2, 3."""
    return MwisInstance.from_edges([1.0, 2.0, 3.0], [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def two_bid_instance() -> WdpInstance:
    """Two bids competing for one unit item plus a bid on a private item."""
    items = (Item(id=0), Item(id=1))
    bids = (
        Bid(id=0, value=5.0, items=(0,)),
        Bid(id=1, value=3.0, items=(0,)),
        Bid(id=2, value=2.0, items=(1,)),
    )
    return WdpInstance(items=items, bids=bids, name="two-bid")


@pytest.fixture
def make_random_instance() -> Callable[..., WdpInstance]:
    """Factory for random instances with integer-valued bids."""

    def make(
        rng: np.random.Generator,
        n_bids: int,
        n_items: int = 6,
        unit: bool = False,
        max_items: int = 3,
    ) -> WdpInstance:
        items = tuple(
            Item(id=e, capacity=1.0 if unit else float(rng.integers(1, 3)))
            for e in range(n_items)
        )
        bids = []
        for b in range(n_bids):
            size = int(rng.integers(1, min(max_items, n_items) + 1))
            chosen = sorted(int(e) for e in rng.choice(n_items, size=size, replace=False))
            bids.append(
                Bid(
                    id=b,
                    value=float(rng.integers(1, 101)),
                    items=tuple(chosen),
                    demand=1.0 if unit else float(rng.integers(1, 3)),
                )
            )
        return WdpInstance(items=items, bids=tuple(bids), name=f"random-{n_bids}")

    return make


@pytest.fixture(scope="module")
def labeled_mix() -> list[LabeledInstance]:
    """120 mixed instances labeled with the exact solver."""
    return label_dataset(gen_mixed(SMALL_MIX), time_limit=10.0)


@pytest.fixture(scope="module")
def mix_dataset(labeled_mix: list[LabeledInstance]) -> HardnessDataset:
    """Features and gaps for the labeled mix."""
    return build_dataset(labeled_mix)


@pytest.fixture(scope="module")
def split_mix(mix_dataset: HardnessDataset) -> tuple[HardnessDataset, HardnessDataset]:
    """Train/test split of the labeled mix."""
    return train_test_split(mix_dataset, 0.2)


@pytest.fixture(scope="module")
def trained_model(split_mix: tuple[HardnessDataset, HardnessDataset]) -> HardnessModel:
    """Model trained briefly on the training half of the mix."""
    train_set, _ = split_mix
    return train(train_set, QUICK_TRAIN)
