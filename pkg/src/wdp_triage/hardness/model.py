"""The gap regressor: Linear -> BatchNorm -> ReLU, twice, then Linear.

Written directly in numpy so gradients can be checked against finite
differences and weights serialize to plain JSON.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from wdp_triage.errors import ModelError
from wdp_triage.features import N_FEATURES, FeatureVector
from wdp_triage.utils.io import read_json, write_json

SCHEMA_VERSION = 1
HIDDEN_UNITS = 64
BN_MOMENTUM = 0.1
BN_EPS = 1e-5

# Trainable parameters, in serialization order
PARAM_NAMES = ("W1", "b1", "gamma1", "beta1", "W2", "b2", "gamma2", "beta2", "W3", "b3")
RUNNING_NAMES = ("running_mean1", "running_var1", "running_mean2", "running_var2")


def init_params(rng: np.random.Generator, hidden: int = HIDDEN_UNITS) -> dict[str, np.ndarray]:
    """Uniform fan-in initialization for the linear layers, identity BatchNorm."""
    params: dict[str, np.ndarray] = {}
    shapes = [(N_FEATURES, hidden), (hidden, hidden), (hidden, 1)]
    for layer, (fan_in, fan_out) in enumerate(shapes, start=1):
        bound = 1.0 / np.sqrt(fan_in)
        params[f"W{layer}"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        params[f"b{layer}"] = rng.uniform(-bound, bound, size=fan_out)
    for layer in (1, 2):
        params[f"gamma{layer}"] = np.ones(hidden)
        params[f"beta{layer}"] = np.zeros(hidden)
    return params


@dataclass
class HardnessModel:
    """Trained regressor plus the input standardization it was fit with."""

    params: dict[str, np.ndarray]
    running: dict[str, np.ndarray]
    feature_mean: np.ndarray
    feature_std: np.ndarray
    trained: bool = False
    best_epoch: int = -1
    best_val_loss: float = float("nan")

    @classmethod
    def initialize(cls, rng: np.random.Generator, hidden: int = HIDDEN_UNITS) -> "HardnessModel":
        """Fresh untrained model with identity standardization."""
        running = {
            "running_mean1": np.zeros(hidden),
            "running_var1": np.ones(hidden),
            "running_mean2": np.zeros(hidden),
            "running_var2": np.ones(hidden),
        }
        return cls(
            params=init_params(rng, hidden),
            running=running,
            feature_mean=np.zeros(N_FEATURES),
            feature_std=np.ones(N_FEATURES),
        )

    @property
    def hidden(self) -> int:
        return int(self.params["W1"].shape[1])

    @property
    def architecture(self) -> list[int]:
        return [N_FEATURES, self.hidden, self.hidden, 1]

    def standardize(self, x: np.ndarray) -> np.ndarray:
        """Apply the stored per-feature standardization."""
        return (x - self.feature_mean) / self.feature_std

    def forward(
        self, x: np.ndarray, batch_stats: bool = False
    ) -> tuple[np.ndarray, dict[str, Any]]:
        """
        Raw regressor output for standardized inputs.

        Args:
            x: (N, 20) standardized features
            batch_stats: Normalize with the batch's own statistics (training)
                instead of the running estimates (inference)

        Returns:
            (output of shape (N,), cache for ``backward``)
        """
        p = self.params
        cache: dict[str, Any] = {"x": x}
        h = x
        for layer in (1, 2):
            z = h @ p[f"W{layer}"] + p[f"b{layer}"]
            if batch_stats:
                mean = z.mean(axis=0)
                var = z.var(axis=0)
            else:
                mean = self.running[f"running_mean{layer}"]
                var = self.running[f"running_var{layer}"]
            inv_std = 1.0 / np.sqrt(var + BN_EPS)
            z_hat = (z - mean) * inv_std
            a = p[f"gamma{layer}"] * z_hat + p[f"beta{layer}"]
            h_next = np.maximum(a, 0.0)
            cache[f"layer{layer}"] = {
                "h_in": h,
                "z": z,
                "mean": mean,
                "var": var,
                "inv_std": inv_std,
                "z_hat": z_hat,
                "a": a,
            }
            h = h_next
        cache["h2"] = h
        out = (h @ p["W3"] + p["b3"]).reshape(-1)
        return out, cache

    def backward(
        self, d_out: np.ndarray, cache: dict[str, Any], batch_stats: bool = True
    ) -> dict[str, np.ndarray]:
        """Gradients of a scalar loss given dLoss/dOutput of shape (N,)."""
        p = self.params
        grads: dict[str, np.ndarray] = {}
        d = d_out.reshape(-1, 1)
        grads["W3"] = cache["h2"].T @ d
        grads["b3"] = d.sum(axis=0)
        dh = d @ p["W3"].T

        for layer in (2, 1):
            c = cache[f"layer{layer}"]
            da = dh * (c["a"] > 0)
            grads[f"gamma{layer}"] = (da * c["z_hat"]).sum(axis=0)
            grads[f"beta{layer}"] = da.sum(axis=0)
            dz_hat = da * p[f"gamma{layer}"]
            if batch_stats:
                n = dz_hat.shape[0]
                dz = (c["inv_std"] / n) * (
                    n * dz_hat
                    - dz_hat.sum(axis=0)
                    - c["z_hat"] * (dz_hat * c["z_hat"]).sum(axis=0)
                )
            else:
                dz = dz_hat * c["inv_std"]
            grads[f"W{layer}"] = c["h_in"].T @ dz
            grads[f"b{layer}"] = dz.sum(axis=0)
            dh = dz @ p[f"W{layer}"].T

        return grads

    def loss_and_gradients(
        self, x: np.ndarray, y: np.ndarray, l2: float = 0.0
    ) -> tuple[float, dict[str, np.ndarray], dict[str, Any]]:
        """
        Mean squared error (plus ``l2 / 2 * ||params||^2``) in training mode.

        Returns:
            (loss, gradients by parameter name, forward cache)
        """
        out, cache = self.forward(x, batch_stats=True)
        residual = out - y
        loss = float(np.mean(residual**2))
        grads = self.backward(2.0 * residual / residual.size, cache, batch_stats=True)
        if l2 > 0.0:
            loss += 0.5 * l2 * sum(float(np.sum(v**2)) for v in self.params.values())
            for name, value in self.params.items():
                grads[name] = grads[name] + l2 * value
        return loss, grads, cache

    def update_running_stats(self, cache: dict[str, Any]) -> None:
        """Fold one training batch's statistics into the running estimates."""
        for layer in (1, 2):
            c = cache[f"layer{layer}"]
            n = c["z"].shape[0]
            unbiased = c["var"] * n / (n - 1)
            mean_key, var_key = f"running_mean{layer}", f"running_var{layer}"
            self.running[mean_key] = (
                (1 - BN_MOMENTUM) * self.running[mean_key] + BN_MOMENTUM * c["mean"]
            )
            self.running[var_key] = (
                (1 - BN_MOMENTUM) * self.running[var_key] + BN_MOMENTUM * unbiased
            )

    def raw_predict(self, features: np.ndarray) -> np.ndarray:
        """Unclamped inference-mode output for raw (unstandardized) features."""
        x = np.atleast_2d(np.asarray(features, dtype=np.float64))
        out, _ = self.forward(self.standardize(x), batch_stats=False)
        return out

    def predict_batch(self, features: np.ndarray) -> np.ndarray:
        """
        Predicted gaps in [0, 1] for an (N, 20) matrix of raw features.

        Raises:
            ModelError: If the model has not been trained
        """
        if not self.trained:
            raise ModelError("model is not trained")
        return np.clip(self.raw_predict(features), 0.0, 1.0)

    def predict(self, features: FeatureVector | np.ndarray) -> float:
        """Predicted greedy gap for one instance, clamped to [0, 1]."""
        row = features.to_array() if isinstance(features, FeatureVector) else features
        return float(self.predict_batch(np.asarray(row).reshape(1, -1))[0])

    def copy(self) -> "HardnessModel":
        return HardnessModel(
            params={k: v.copy() for k, v in self.params.items()},
            running={k: v.copy() for k, v in self.running.items()},
            feature_mean=self.feature_mean.copy(),
            feature_std=self.feature_std.copy(),
            trained=self.trained,
            best_epoch=self.best_epoch,
            best_val_loss=self.best_val_loss,
        )

    def to_dict(self) -> dict[str, Any]:
        """Convert to the model JSON document."""
        params = {name: self.params[name].tolist() for name in PARAM_NAMES}
        params.update({name: self.running[name].tolist() for name in RUNNING_NAMES})
        return {
            "schema_version": SCHEMA_VERSION,
            "architecture": self.architecture,
            "params": params,
            "feature_mean": self.feature_mean.tolist(),
            "feature_std": self.feature_std.tolist(),
            "trained": self.trained,
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "HardnessModel":
        """
        Rebuild from a model JSON document.

        Raises:
            ModelError: On a schema mismatch or missing parameters
        """
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ModelError(f"unsupported model schema_version {version!r}")
        try:
            raw = data["params"]
            params = {name: np.asarray(raw[name], dtype=np.float64) for name in PARAM_NAMES}
            running = {name: np.asarray(raw[name], dtype=np.float64) for name in RUNNING_NAMES}
            model = cls(
                params=params,
                running=running,
                feature_mean=np.asarray(data["feature_mean"], dtype=np.float64),
                feature_std=np.asarray(data["feature_std"], dtype=np.float64),
                trained=bool(data["trained"]),
                best_epoch=int(data.get("best_epoch", -1)),
                best_val_loss=float(data.get("best_val_loss", float("nan"))),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ModelError(f"malformed model document: {e!r}") from e
        if model.params["W1"].shape[0] != N_FEATURES:
            raise ModelError(f"model expects {model.params['W1'].shape[0]} features")
        return model

    def save(self, path: Path) -> Path:
        """Write the model JSON."""
        return write_json(self.to_dict(), path)

    @classmethod
    def load(cls, path: Path) -> "HardnessModel":
        """
        Read a model JSON.

        Raises:
            ModelError: If the file is missing or malformed
        """
        try:
            data = read_json(path)
        except ValueError as e:
            raise ModelError(f"cannot load model: {e}") from e
        if not isinstance(data, dict):
            raise ModelError(f"{path}: model document must be a JSON object")
        return cls.from_dict(data)
