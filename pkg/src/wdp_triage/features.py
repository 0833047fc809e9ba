"""Structural hardness features of a WDP instance.

Twenty statistics in a fixed order, grouped into bid density, bottleneck
tightness, value-congestion correlation, bid value statistics, capacity and
utilization statistics, and conflict structure. Degenerate statistics (zero
mean or zero variance) are reported as 0 so vectors stay finite.
"""

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import stats

from wdp_triage.errors import InvalidInstanceError
from wdp_triage.models import WdpInstance

logger = logging.getLogger(__name__)

FEATURE_NAMES: tuple[str, ...] = (
    "cv_bid_density",
    "mean_bid_density",
    "max_bid_density",
    "std_bid_density",
    "bottleneck_tightness",
    "value_congestion_corr",
    "bid_value_mean",
    "bid_value_std",
    "bid_value_skew",
    "bid_value_kurtosis",
    "bid_cap_mean",
    "bid_cap_std",
    "edge_util_mean",
    "edge_util_std",
    "edge_util_max",
    "conflict_density",
    "graph_density",
    "bid_overlap_jaccard",
    "value_cap_ratio_mean",
    "value_cap_ratio_std",
)

N_FEATURES = len(FEATURE_NAMES)

FEATURE_GROUPS: dict[str, tuple[str, ...]] = {
    "bid_density": FEATURE_NAMES[0:4],
    "bottleneck_tightness": FEATURE_NAMES[4:5],
    "value_congestion_corr": FEATURE_NAMES[5:6],
    "bid_value_stats": FEATURE_NAMES[6:10],
    "capacity_utilization": FEATURE_NAMES[10:15],
    "conflict_structure": FEATURE_NAMES[15:20],
}

# Pairs of bids scored for the Jaccard overlap feature
JACCARD_PAIRS = 200

BOTTLENECK_FRACTION = 0.25


@dataclass(frozen=True)
class FeatureVector:
    """The 20 feature values in canonical order."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != N_FEATURES:
            raise ValueError(f"expected {N_FEATURES} feature values, got {len(self.values)}")

    @property
    def names(self) -> tuple[str, ...]:
        return FEATURE_NAMES

    def __getitem__(self, key: int | str) -> float:
        if isinstance(key, str):
            return self.values[FEATURE_NAMES.index(key)]
        return self.values[key]

    def __len__(self) -> int:
        return N_FEATURES

    def to_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def to_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values, strict=True))


def _mean_std(x: np.ndarray) -> tuple[float, float]:
    if x.size == 0:
        return 0.0, 0.0
    return float(np.mean(x)), float(np.std(x))


def _cv(x: np.ndarray) -> float:
    mean, std = _mean_std(x)
    if mean == 0.0:
        return 0.0
    return std / mean


def _degenerate(x: np.ndarray) -> bool:
    return x.size < 2 or float(np.ptp(x)) == 0.0


def _skew(x: np.ndarray) -> float:
    if _degenerate(x):
        return 0.0
    return float(stats.skew(x, bias=True))


def _kurtosis(x: np.ndarray) -> float:
    if _degenerate(x):
        return 0.0
    return float(stats.kurtosis(x, fisher=True, bias=True))


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    if _degenerate(x) or _degenerate(y):
        return 0.0
    r = float(stats.pearsonr(x, y)[0])
    return r if math.isfinite(r) else 0.0


def _item_density(instance: WdpInstance) -> dict[int, int]:
    counts: dict[int, int] = {}
    for bid in instance.bids:
        for e in bid.items:
            counts[e] = counts.get(e, 0) + 1
    return counts


def bid_density_cv(instance: WdpInstance) -> float:
    """Coefficient of variation of bids per used item."""
    counts = _item_density(instance)
    return _cv(np.array(sorted(counts.values()), dtype=np.float64))


def _jaccard_mean(instance: WdpInstance) -> float:
    bids = sorted(instance.bids, key=lambda b: b.id)
    n = len(bids)
    if n < 2:
        return 0.0
    sets = [frozenset(b.items) for b in bids]
    heads, tails = np.triu_indices(n, k=1)
    if heads.size > JACCARD_PAIRS:
        rng = np.random.default_rng(instance.seed)
        picked = np.sort(rng.choice(heads.size, size=JACCARD_PAIRS, replace=False))
        heads, tails = heads[picked], tails[picked]
    scores = [
        len(sets[i] & sets[j]) / len(sets[i] | sets[j])
        for i, j in zip(heads.tolist(), tails.tolist())
    ]
    return math.fsum(scores) / len(scores)


def extract(instance: WdpInstance) -> FeatureVector:
    """Compute the 20-dimensional feature vector.

    Density and utilization statistics only count used items (items some
    bid requests); graph density divides by every item.

    Raises:
        InvalidInstanceError: If the instance has no bids
    """
    if instance.n == 0:
        label = instance.name or "instance"
        raise InvalidInstanceError(f"{label}: cannot extract features from zero bids")

    used = sorted(_item_density(instance).items())
    used_ids = [e for e, _ in used]
    density = np.array([count for _, count in used], dtype=np.float64)

    load = dict.fromkeys(used_ids, 0.0)
    for bid in instance.bids:
        for e in bid.items:
            load[e] += bid.demand
    util_by_item = {e: load[e] / instance.capacity(e) for e in used_ids}
    util = np.array([util_by_item[e] for e in used_ids], dtype=np.float64)

    # Most congested first, ties by item id
    ranked = sorted(used_ids, key=lambda e: (-util_by_item[e], e))
    top = max(1, math.ceil(BOTTLENECK_FRACTION * len(ranked)))
    bottleneck = math.fsum(util_by_item[e] for e in ranked[:top]) / top

    values = np.array([b.value for b in instance.bids], dtype=np.float64)
    demands = np.array([b.demand for b in instance.bids], dtype=np.float64)
    congestion = np.array(
        [math.fsum(util_by_item[e] for e in b.items) / len(b.items) for b in instance.bids],
        dtype=np.float64,
    )
    ratio = values / demands
    set_sizes = np.array([len(b.items) for b in instance.bids], dtype=np.float64)

    density_mean, density_std = _mean_std(density)
    value_mean, value_std = _mean_std(values)
    cap_mean, cap_std = _mean_std(demands)
    util_mean, util_std = _mean_std(util)
    ratio_mean, ratio_std = _mean_std(ratio)

    features = (
        _cv(density),
        density_mean,
        float(density.max()),
        density_std,
        bottleneck,
        _pearson(values, congestion),
        value_mean,
        value_std,
        _skew(values),
        _kurtosis(values),
        cap_mean,
        cap_std,
        util_mean,
        util_std,
        float(util.max()),
        density_mean,
        instance.n * float(set_sizes.mean()) / instance.m,
        _jaccard_mean(instance),
        ratio_mean,
        ratio_std,
    )
    if not all(math.isfinite(f) for f in features):
        logger.warning("%s: non-finite feature mapped to 0", instance.name or "instance")
        features = tuple(f if math.isfinite(f) else 0.0 for f in features)
    return FeatureVector(values=tuple(float(f) for f in features))


def feature_matrix(vectors: Iterable[FeatureVector]) -> np.ndarray:
    """Stack feature vectors into an (N, 20) array."""
    rows = [v.to_array() for v in vectors]
    if not rows:
        return np.zeros((0, N_FEATURES))
    return np.vstack(rows)


def group_columns(groups: Sequence[str]) -> list[int]:
    """Column indices covered by the named feature groups."""
    return sorted(FEATURE_NAMES.index(name) for group in groups for name in FEATURE_GROUPS[group])
