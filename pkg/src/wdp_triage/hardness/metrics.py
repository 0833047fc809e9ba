"""Regression and thresholded-classification metrics for the gap regressor."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import stats
from sklearn.metrics import (
    accuracy_score,
    mean_absolute_error,
    mean_squared_error,
    precision_score,
    recall_score,
)

from wdp_triage.errors import ConfigError, DatasetError
from wdp_triage.hardness.dataset import HardnessDataset
from wdp_triage.hardness.model import HardnessModel

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.05

# 0.006 .. 0.086 in steps of 0.008
DEFAULT_SWEEP = tuple(round(0.006 + 0.008 * i, 3) for i in range(11))


@dataclass(frozen=True)
class EvalReport:
    """Held-out quality of a gap regressor at one hardness threshold."""

    mae: float
    pearson_r: float
    pearson_degenerate: bool
    accuracy: float
    precision: float
    recall: float
    threshold: float
    predictions: tuple[float, ...]
    targets: tuple[float, ...]

    def to_dict(self, include_pairs: bool = True) -> dict[str, Any]:
        """Convert to the eval JSON document."""
        data: dict[str, Any] = {
            "mae": self.mae,
            "pearson_r": self.pearson_r,
            "pearson_degenerate": self.pearson_degenerate,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "threshold": self.threshold,
        }
        if include_pairs:
            data["pairs"] = [
                {"predicted": p, "true": t}
                for p, t in zip(self.predictions, self.targets, strict=True)
            ]
        return data


def pearson(predicted: np.ndarray, true: np.ndarray) -> tuple[float, bool]:
    """
    Pearson correlation with a zero-variance guard.

    Returns:
        (r clipped to [-1, 1], True when a side had zero variance and r was set to 0)
    """
    if predicted.size < 2 or np.ptp(predicted) == 0.0 or np.ptp(true) == 0.0:
        return 0.0, True
    r = float(stats.pearsonr(predicted, true)[0])
    if not math.isfinite(r):
        return 0.0, True
    return max(-1.0, min(1.0, r)), False


def compute_metrics(
    predicted: Sequence[float] | np.ndarray,
    true: Sequence[float] | np.ndarray,
    threshold: float = DEFAULT_THRESHOLD,
) -> EvalReport:
    """
    Score predictions against true gaps.

    An instance counts as hard when its gap is strictly above ``threshold``,
    on both the predicted and the true side.

    Raises:
        DatasetError: If there are no rows or the lengths differ
    """
    pred = np.asarray(predicted, dtype=np.float64)
    target = np.asarray(true, dtype=np.float64)
    if pred.size == 0:
        raise DatasetError("cannot evaluate an empty test set")
    if pred.shape != target.shape:
        raise DatasetError(f"{pred.size} predictions for {target.size} targets")

    r, degenerate = pearson(pred, target)
    if degenerate:
        logger.warning("pearson correlation undefined (zero variance); reporting 0")

    true_hard = target > threshold
    pred_hard = pred > threshold
    return EvalReport(
        mae=float(mean_absolute_error(target, pred)),
        pearson_r=r,
        pearson_degenerate=degenerate,
        accuracy=float(accuracy_score(true_hard, pred_hard)),
        precision=float(precision_score(true_hard, pred_hard, zero_division=0)),
        recall=float(recall_score(true_hard, pred_hard, zero_division=0)),
        threshold=threshold,
        predictions=tuple(float(p) for p in pred),
        targets=tuple(float(t) for t in target),
    )


def evaluate(
    model: HardnessModel, dataset: HardnessDataset, threshold: float = DEFAULT_THRESHOLD
) -> EvalReport:
    """MAE, correlation and thresholded metrics of ``model`` on a labeled set."""
    if len(dataset) == 0:
        raise DatasetError("cannot evaluate an empty test set")
    return compute_metrics(model.predict_batch(dataset.features), dataset.labels(), threshold)


def threshold_sweep(
    model: HardnessModel,
    dataset: HardnessDataset,
    grid: Sequence[float] = DEFAULT_SWEEP,
) -> list[tuple[float, float]]:
    """
    Binary accuracy at each threshold of ``grid``.

    Raises:
        ConfigError: If the grid is empty
    """
    if not grid:
        raise ConfigError("threshold grid is empty")
    if len(dataset) == 0:
        raise DatasetError("cannot evaluate an empty test set")
    predicted = model.predict_batch(dataset.features)
    true = dataset.labels()
    return [
        (float(theta), float(accuracy_score(true > theta, predicted > theta))) for theta in grid
    ]


def plateau_width(curve: Sequence[tuple[float, float]]) -> int:
    """Longest run of consecutive grid points at the curve's maximum accuracy."""
    if not curve:
        return 0
    best = max(acc for _, acc in curve)
    longest = run = 0
    for _, acc in curve:
        run = run + 1 if acc == best else 0
        longest = max(longest, run)
    return longest


def best_threshold(curve: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """First (threshold, accuracy) pair reaching the maximum accuracy."""
    if not curve:
        raise ConfigError("threshold curve is empty")
    best = max(acc for _, acc in curve)
    return next(point for point in curve if point[1] == best)


def _canonical_rows(dataset: HardnessDataset) -> tuple[np.ndarray, np.ndarray]:
    x = dataset.features
    y = dataset.labels()
    # lexsort uses the last key as primary: feature 0 first, gap last
    keys = [y, *(x[:, j] for j in reversed(range(x.shape[1])))]
    order = np.lexsort(keys)
    return x[order], y[order]


def permutation_importance(
    model: HardnessModel,
    dataset: HardnessDataset,
    repeats: int = 10,
    seed: int = 0,
) -> np.ndarray:
    """
    Mean MSE increase when each feature column is shuffled.

    Rows are put in a canonical order first, so the result does not depend
    on how the validation set is ordered.

    Returns:
        Array of 20 importances in canonical feature order
    """
    if len(dataset) == 0:
        raise DatasetError("cannot compute importance on an empty set")
    if repeats < 1:
        raise ConfigError(f"repeats must be positive, got {repeats}")

    x, y = _canonical_rows(dataset)
    baseline = float(mean_squared_error(y, model.predict_batch(x)))
    rng = np.random.default_rng(seed)
    importances = np.zeros(x.shape[1])
    for j in range(x.shape[1]):
        increases = []
        for _ in range(repeats):
            shuffled = x.copy()
            shuffled[:, j] = x[rng.permutation(len(x)), j]
            increases.append(float(mean_squared_error(y, model.predict_batch(shuffled))) - baseline)
        importances[j] = math.fsum(increases) / repeats
    return importances
