"""Mini-batch AdamW training with early stopping."""

import logging
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from wdp_triage.errors import ConfigError, ModelError
from wdp_triage.hardness.dataset import HardnessDataset
from wdp_triage.hardness.model import HIDDEN_UNITS, HardnessModel

logger = logging.getLogger(__name__)

MIN_TRAINING_ROWS = 50


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and schedule settings for the gap regressor."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    weight_decay: float = 1e-5
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 10
    val_fraction: float = 0.2
    grad_clip: float = 1.0
    lr_factor: float = 0.5
    lr_patience: int = 5
    min_lr: float = 1e-6
    hidden_units: int = HIDDEN_UNITS
    rng_seed: int = 0

    def violations(self) -> list[str]:
        """Every setting that is out of range."""
        problems: list[str] = []
        positive = {
            "learning_rate": self.learning_rate,
            "adam_eps": self.adam_eps,
            "batch_size": self.batch_size,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
            "grad_clip": self.grad_clip,
            "lr_patience": self.lr_patience,
            "min_lr": self.min_lr,
            "hidden_units": self.hidden_units,
        }
        for key, value in positive.items():
            if not value > 0:
                problems.append(f"{key} must be positive, got {value}")
        if self.weight_decay < 0:
            problems.append(f"weight_decay must be non-negative, got {self.weight_decay}")
        for key, value in {"beta1": self.beta1, "beta2": self.beta2}.items():
            if not 0.0 < value < 1.0:
                problems.append(f"{key} must be in (0, 1), got {value}")
        if not 0.0 < self.val_fraction < 1.0:
            problems.append(f"val_fraction must be in (0, 1), got {self.val_fraction}")
        if not 0.0 < self.lr_factor < 1.0:
            problems.append(f"lr_factor must be in (0, 1), got {self.lr_factor}")
        return problems

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


class AdamW:
    """Adam moments with weight decay applied directly to the parameters."""

    def __init__(self, params: dict[str, np.ndarray], config: TrainConfig) -> None:
        self.config = config
        self.lr = config.learning_rate
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        c = self.config
        self.step_count += 1
        bias1 = 1.0 - c.beta1**self.step_count
        bias2 = 1.0 - c.beta2**self.step_count
        for name, value in params.items():
            g = grads[name]
            self.m[name] = c.beta1 * self.m[name] + (1.0 - c.beta1) * g
            self.v[name] = c.beta2 * self.v[name] + (1.0 - c.beta2) * g * g
            m_hat = self.m[name] / bias1
            v_hat = self.v[name] / bias2
            value -= self.lr * c.weight_decay * value
            value -= self.lr * m_hat / (np.sqrt(v_hat) + c.adam_eps)


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale gradients in place so their global L2 norm is at most ``max_norm``."""
    total = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
    if total > max_norm:
        scale = max_norm / (total + 1e-12)
        for name in grads:
            grads[name] = grads[name] * scale
    return total


class PlateauScheduler:
    """Multiply the learning rate by ``factor`` after ``patience`` epochs without progress."""

    def __init__(self, optimizer: AdamW, factor: float, patience: int, min_lr: float) -> None:
        self.optimizer = optimizer
        self.factor = factor
        self.patience = patience
        self.min_lr = min_lr
        self.best = float("inf")
        self.bad_epochs = 0

    def step(self, metric: float) -> None:
        if metric < self.best:
            self.best = metric
            self.bad_epochs = 0
            return
        self.bad_epochs += 1
        if self.bad_epochs > self.patience:
            new_lr = max(self.optimizer.lr * self.factor, self.min_lr)
            if new_lr < self.optimizer.lr:
                logger.debug("reducing learning rate to %.2e", new_lr)
            self.optimizer.lr = new_lr
            self.bad_epochs = 0


def standardization_stats(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column mean and population std; zero std becomes 1."""
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)
    return mean, std


def _mse(model: HardnessModel, x: np.ndarray, y: np.ndarray) -> float:
    out, _ = model.forward(x, batch_stats=False)
    return float(np.mean((out - y) ** 2))


def train(dataset: HardnessDataset, config: TrainConfig | None = None) -> HardnessModel:
    """
    Fit the gap regressor.

    A validation slice is carved from the rows with the run seed; inputs are
    standardized with the remaining training rows' statistics. The model
    with the lowest validation MSE is returned.

    Raises:
        ConfigError: If the config is out of range
        ModelError: If there are fewer than 50 labeled rows, gaps outside
            [0, 1], or fewer than two distinct gap values
    """
    config = config or TrainConfig()
    problems = config.violations()
    if problems:
        raise ConfigError("invalid train config: " + "; ".join(problems))

    if dataset.gaps is None:
        raise ModelError("training needs greedy_gap labels")
    y_all = dataset.gaps
    n = len(dataset)
    if n < MIN_TRAINING_ROWS:
        raise ModelError(f"need at least {MIN_TRAINING_ROWS} labeled instances, got {n}")
    if np.any(y_all < 0.0) or np.any(y_all > 1.0):
        raise ModelError("greedy gaps must lie in [0, 1]")
    if np.unique(y_all).size < 2:
        raise ModelError("degenerate regression: fewer than 2 distinct gap values")

    rng = np.random.default_rng(config.rng_seed)
    order = rng.permutation(n)
    n_val = max(1, int(round(config.val_fraction * n)))
    val_rows, train_rows = order[:n_val], order[n_val:]

    model = HardnessModel.initialize(rng, config.hidden_units)
    model.feature_mean, model.feature_std = standardization_stats(dataset.features[train_rows])
    x_train = model.standardize(dataset.features[train_rows])
    y_train = y_all[train_rows]
    x_val = model.standardize(dataset.features[val_rows])
    y_val = y_all[val_rows]

    optimizer = AdamW(model.params, config)
    scheduler = PlateauScheduler(optimizer, config.lr_factor, config.lr_patience, config.min_lr)

    best = model.copy()
    best_loss = float("inf")
    stale = 0
    for epoch in range(config.max_epochs):
        shuffled = rng.permutation(len(train_rows))
        train_loss = 0.0
        batches = 0
        for start in range(0, len(shuffled), config.batch_size):
            batch = shuffled[start : start + config.batch_size]
            if batch.size < 2:
                continue
            loss, grads, cache = model.loss_and_gradients(x_train[batch], y_train[batch])
            clip_gradients(grads, config.grad_clip)
            optimizer.step(model.params, grads)
            model.update_running_stats(cache)
            train_loss += loss
            batches += 1

        val_loss = _mse(model, x_val, y_val)
        scheduler.step(val_loss)
        logger.debug(
            "epoch %d: train %.6f val %.6f lr %.2e",
            epoch,
            train_loss / max(batches, 1),
            val_loss,
            optimizer.lr,
        )

        if val_loss < best_loss:
            best_loss = val_loss
            best = model.copy()
            best.best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                logger.debug("early stop at epoch %d (best %d)", epoch, best.best_epoch)
                break

    best.trained = True
    best.best_val_loss = best_loss
    return best
