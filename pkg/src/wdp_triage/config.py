"""Configuration management for wdp-triage."""

import copy
import json
import os
from pathlib import Path
from typing import Any

from wdp_triage.errors import ConfigError
from wdp_triage.generators.base import MixConfig, float_option, int_option
from wdp_triage.hardness.training import TrainConfig
from wdp_triage.router import BENCH_NODE_BUDGET, SelectorConfig

# Default config filename
CONFIG_FILENAME = "pipeline.json"

THREADS_ENV = "WDP_TRIAGE_THREADS"

DEFAULT_SEEDS = [42, 123, 456]


def get_config_dir() -> Path:
    """Get the config directory path (XDG compliant)."""
    xdg_config_home = os.getenv("XDG_CONFIG_HOME", str(Path.home() / ".config"))
    return Path(xdg_config_home) / "wdp-triage"


def get_config_path() -> Path:
    """Get the default config file path."""
    return get_config_dir() / CONFIG_FILENAME


def find_config_file() -> Path | None:
    """Find the config file in standard locations.

    Searches for config in the following order:
    1. pipeline.json in current directory
    2. XDG config: ~/.config/wdp-triage/pipeline.json
    """
    config_paths = [
        Path(CONFIG_FILENAME),
        get_config_path(),
    ]

    for path in config_paths:
        if path.exists():
            return path

    return None


def load_json_config(config_path: Path) -> dict[str, Any]:
    """Load configuration from a JSON file.

    Raises:
        ConfigError: If the file is missing, unparsable or not an object
    """
    try:
        with open(config_path) as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {config_path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Could not parse {config_path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{config_path}: config must be a JSON object")
    return data


def save_json_config(config: dict[str, Any], config_path: Path | None = None) -> Path:
    """Save configuration to a JSON file.

    Args:
        config: Configuration dictionary to save
        config_path: Path to save to (defaults to XDG config location)

    Returns:
        Path where config was saved
    """
    if config_path is None:
        config_path = get_config_path()

    # Ensure directory exists
    config_path.parent.mkdir(parents=True, exist_ok=True)

    with open(config_path, "w") as f:
        json.dump(config, f, indent=2)
        f.write("\n")

    return config_path


def create_default_config() -> dict[str, Any]:
    """Create the default pipeline configuration, one section per stage."""
    mix = MixConfig()
    train = TrainConfig()
    selector = SelectorConfig()
    return {
        "seeds": list(DEFAULT_SEEDS),
        "generate": {
            "n_hard": 400,
            "n_easy": 400,
            "n_traps": mix.n_traps,
            "k_min": mix.k_min,
            "k_max": mix.k_max,
            "items_per_fish": mix.items_per_fish,
            "fish_value_low": mix.fish_value_low,
            "fish_value_high": mix.fish_value_high,
            "whale_ratio_low": mix.whale_ratio_low,
            "whale_ratio_high": mix.whale_ratio_high,
            "filler_count": mix.filler_count,
            "filler_ratio_low": mix.filler_ratio_low,
            "filler_ratio_high": mix.filler_ratio_high,
            "n_items": mix.n_items,
            "easy_bids": mix.easy_bids,
            "easy_items": mix.easy_items,
            "easy_capacity": mix.easy_capacity,
            "easy_items_min": mix.easy_items_min,
            "easy_items_max": mix.easy_items_max,
            "rng_seed": 7,
        },
        "label": {
            "time_limit": selector.time_limit,
        },
        "train": {
            "learning_rate": train.learning_rate,
            "beta1": train.beta1,
            "beta2": train.beta2,
            "weight_decay": train.weight_decay,
            "batch_size": train.batch_size,
            "max_epochs": train.max_epochs,
            "patience": train.patience,
            "val_fraction": train.val_fraction,
            "grad_clip": train.grad_clip,
            "lr_factor": train.lr_factor,
            "lr_patience": train.lr_patience,
            "min_lr": train.min_lr,
            "test_fraction": 0.2,
        },
        "evaluate": {
            "threshold": 0.05,
            "sweep_start": 0.006,
            "sweep_step": 0.008,
            "sweep_points": 11,
            "importance_repeats": 10,
        },
        "ablation": {
            "enabled": True,
        },
        "bench": {
            "n_hard": 50,
            "n_easy": 50,
            "rng_seed": 2024,
            "mode": selector.mode,
            "cv_threshold": selector.cv_threshold,
            "calibrate": True,
            "learned_threshold": selector.learned_threshold,
            "time_limit": selector.time_limit,
            "node_budget": BENCH_NODE_BUDGET,
            "budget_sweep": [1, 4, 16, 64, 256, 1024],
            "model_path": None,
        },
    }


def _coerce_value(path: str, default: Any, value: Any) -> Any:
    """Check an override against the type of its default.

    Raises:
        ConfigError: Naming the dotted key when the value has the wrong type
    """
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"'{path}' must be true or false, got {value!r}")
        return value
    if isinstance(default, int):
        return int_option(path, value)
    if isinstance(default, float):
        return float_option(path, value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"'{path}' must be a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"'{path}' must be a list, got {value!r}")
        return [int_option(path, v) for v in value]
    # optional paths such as bench.model_path
    if value is not None and not isinstance(value, str):
        raise ConfigError(f"'{path}' must be a string or null, got {value!r}")
    return value


def merge_config(defaults: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """
    Overlay user values on the defaults, one section deep.

    Raises:
        ConfigError: On an unknown section or key, a section that is not an object,
            or a value whose type does not match its default
    """
    merged = copy.deepcopy(defaults)
    for section, value in overrides.items():
        if section not in defaults:
            raise ConfigError(f"unknown config section '{section}'")
        if not isinstance(defaults[section], dict):
            merged[section] = _coerce_value(section, defaults[section], value)
            continue
        if not isinstance(value, dict):
            raise ConfigError(f"config section '{section}' must be an object")
        for key, item in value.items():
            if key not in defaults[section]:
                raise ConfigError(f"unknown config key '{section}.{key}'")
            merged[section][key] = _coerce_value(f"{section}.{key}", defaults[section][key], item)
    return merged


def load_config(config_path: Path | None = None) -> dict[str, Any]:
    """Load configuration merged over the defaults.

    Args:
        config_path: Explicit path to a pipeline.json file

    Returns:
        Full config dict (defaults when no file is found)
    """
    if config_path is None:
        config_path = find_config_file()
    if config_path is None:
        return create_default_config()
    return merge_config(create_default_config(), load_json_config(config_path))


def config_exists() -> bool:
    """Check if any config file exists."""
    return find_config_file() is not None


def _section(config: dict[str, Any], name: str) -> dict[str, Any]:
    section = config.get(name, {})
    if not isinstance(section, dict):
        raise ConfigError(f"config section '{name}' must be an object")
    return section


def _build(cls: type[Any], values: dict[str, Any], section: str) -> Any:
    fields = cls.__dataclass_fields__
    kwargs: dict[str, Any] = {}
    for key, raw in values.items():
        if key not in fields:
            continue
        default = fields[key].default
        if default is None or isinstance(default, str):
            kwargs[key] = raw
        else:
            kwargs[key] = _coerce_value(f"{section}.{key}", default, raw)
    return cls(**kwargs)


def get_seeds(config: dict[str, Any] | None = None) -> list[int]:
    """Training seeds from config (default 42, 123, 456)."""
    seeds = (config or {}).get("seeds", DEFAULT_SEEDS)
    try:
        out = [int(s) for s in seeds]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"seeds must be a list of integers: {e}") from e
    if not out:
        raise ConfigError("seeds must not be empty")
    return out


def get_mix_config(config: dict[str, Any] | None = None, section: str = "generate") -> MixConfig:
    """Build the MixConfig of a section.

    Raises:
        ConfigError: If a value has the wrong type or the result is invalid
    """
    mix: MixConfig = _build(MixConfig, _section(config or {}, section), section)
    problems = mix.violations()
    if problems:
        raise ConfigError(f"invalid '{section}' config: " + "; ".join(problems))
    return mix


def get_train_config(config: dict[str, Any] | None = None, seed: int = 0) -> TrainConfig:
    """Build the TrainConfig for one seed.

    Raises:
        ConfigError: If a value has the wrong type or is out of range
    """
    values = dict(_section(config or {}, "train"))
    values["rng_seed"] = seed
    train: TrainConfig = _build(TrainConfig, values, "train")
    problems = train.violations()
    if problems:
        raise ConfigError("invalid 'train' config: " + "; ".join(problems))
    return train


def get_selector_config(config: dict[str, Any] | None = None) -> SelectorConfig:
    """Build the SelectorConfig from the bench section.

    Raises:
        ConfigError: If a value has the wrong type or is out of range
    """
    selector: SelectorConfig = _build(SelectorConfig, _section(config or {}, "bench"), "bench")
    selector.require_valid()
    return selector


def get_worker_count() -> int:
    """Worker processes from WDP_TRIAGE_THREADS (default 1).

    Raises:
        ConfigError: If the variable is not a positive integer
    """
    raw = os.getenv(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return 1
    try:
        workers = int(raw)
    except ValueError as e:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got '{raw}'") from e
    if workers < 1:
        raise ConfigError(f"{THREADS_ENV} must be at least 1, got {workers}")
    return workers
