"""Leave-one-group-out retraining."""

import dataclasses
import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from wdp_triage.errors import ConfigError
from wdp_triage.features import FEATURE_GROUPS, FEATURE_NAMES
from wdp_triage.hardness.dataset import HardnessDataset
from wdp_triage.hardness.metrics import DEFAULT_THRESHOLD, evaluate
from wdp_triage.hardness.training import TrainConfig, train
from wdp_triage.utils.parallel import parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LogoRow:
    """Seed-averaged effect of removing one feature group."""

    group: str
    size: int
    mae_without: float
    delta_mae: float
    delta_corr: float
    top_feature: str

    def to_row(self) -> list[Any]:
        return [
            self.group,
            self.size,
            repr(self.mae_without),
            repr(self.delta_mae),
            repr(self.delta_corr),
            self.top_feature,
        ]


LOGO_HEADER = ["group", "size", "mae_without", "delta_mae", "delta_corr", "top_feature"]


def check_partition(groups: Mapping[str, Sequence[str]]) -> None:
    """
    Require the groups to cover every feature exactly once.

    Raises:
        ConfigError: On unknown, missing or repeated features
    """
    seen: list[str] = [name for members in groups.values() for name in members]
    unknown = sorted(set(seen) - set(FEATURE_NAMES))
    repeated = sorted({name for name in seen if seen.count(name) > 1})
    missing = [name for name in FEATURE_NAMES if name not in seen]
    problems = []
    if unknown:
        problems.append(f"unknown features {unknown}")
    if repeated:
        problems.append(f"features in more than one group {repeated}")
    if missing:
        problems.append(f"features in no group {missing}")
    if problems:
        raise ConfigError("feature groups are not a partition: " + "; ".join(problems))


def _fit_and_score(
    job: tuple[HardnessDataset, HardnessDataset, TrainConfig, float],
) -> tuple[float, float]:
    train_set, test_set, config, threshold = job
    report = evaluate(train(train_set, config), test_set, threshold)
    return report.mae, report.pearson_r


def logo_ablation(
    train_set: HardnessDataset,
    test_set: HardnessDataset,
    config: TrainConfig,
    seeds: Sequence[int],
    groups: Mapping[str, Sequence[str]] = FEATURE_GROUPS,
    importances: np.ndarray | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    workers: int = 1,
) -> tuple[float, list[LogoRow]]:
    """
    Retrain with each group's columns zeroed and compare to the full model.

    Args:
        train_set: Labeled training rows
        test_set: Labeled held-out rows
        config: Training settings; ``rng_seed`` is replaced by each seed
        seeds: Training seeds to average over
        groups: Partition of the 20 features
        importances: Optional permutation importances used to name each
            group's top feature
        workers: Process count for the independent retrains

    Returns:
        (baseline MAE, one row per group in ``groups`` order)
    """
    check_partition(groups)
    if not seeds:
        raise ConfigError("logo ablation needs at least one seed")

    variants: list[tuple[str, HardnessDataset, HardnessDataset]] = [
        ("__baseline__", train_set, test_set)
    ]
    for group, members in groups.items():
        columns = [FEATURE_NAMES.index(name) for name in members]
        variants.append((group, train_set.with_zeroed(columns), test_set.with_zeroed(columns)))

    jobs = [
        (tr, te, dataclasses.replace(config, rng_seed=seed), threshold)
        for _, tr, te in variants
        for seed in seeds
    ]
    scores = parallel_map(_fit_and_score, jobs, workers)

    per_variant: dict[str, tuple[float, float]] = {}
    for v, (name, _, _) in enumerate(variants):
        chunk = scores[v * len(seeds) : (v + 1) * len(seeds)]
        mae = math.fsum(s[0] for s in chunk) / len(seeds)
        corr = math.fsum(s[1] for s in chunk) / len(seeds)
        per_variant[name] = (mae, corr)

    base_mae, base_corr = per_variant["__baseline__"]
    rows: list[LogoRow] = []
    for group, members in groups.items():
        mae, corr = per_variant[group]
        if importances is not None:
            top = max(members, key=lambda name: importances[FEATURE_NAMES.index(name)])
        else:
            top = members[0]
        rows.append(
            LogoRow(
                group=group,
                size=len(members),
                mae_without=mae,
                delta_mae=mae - base_mae,
                delta_corr=corr - base_corr,
                top_feature=top,
            )
        )
        logger.debug("logo %s: mae %.5f (delta %+.5f)", group, mae, mae - base_mae)
    return base_mae, rows
