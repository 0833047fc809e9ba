"""Greedy-gap regression: dataset, model, training, metrics and ablation."""

from wdp_triage.hardness.ablation import LOGO_HEADER, LogoRow, check_partition, logo_ablation
from wdp_triage.hardness.dataset import HardnessDataset, train_test_split
from wdp_triage.hardness.metrics import (
    DEFAULT_SWEEP,
    DEFAULT_THRESHOLD,
    EvalReport,
    best_threshold,
    compute_metrics,
    evaluate,
    permutation_importance,
    plateau_width,
    threshold_sweep,
)
from wdp_triage.hardness.model import HardnessModel
from wdp_triage.hardness.training import TrainConfig, train

__all__ = [
    "DEFAULT_SWEEP",
    "DEFAULT_THRESHOLD",
    "LOGO_HEADER",
    "EvalReport",
    "HardnessDataset",
    "HardnessModel",
    "LogoRow",
    "TrainConfig",
    "best_threshold",
    "check_partition",
    "compute_metrics",
    "evaluate",
    "logo_ablation",
    "permutation_importance",
    "plateau_width",
    "threshold_sweep",
    "train",
    "train_test_split",
]
