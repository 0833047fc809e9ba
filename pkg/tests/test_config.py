"""Tests for configuration management."""

import json
from pathlib import Path

import pytest

from wdp_triage.config import (
    DEFAULT_SEEDS,
    config_exists,
    create_default_config,
    find_config_file,
    get_mix_config,
    get_seeds,
    get_selector_config,
    get_train_config,
    get_worker_count,
    load_config,
    merge_config,
    save_json_config,
)
from wdp_triage.errors import ConfigError


class TestFindConfigFile:
    """Tests for find_config_file function."""

    def test_finds_config_in_current_dir(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """Test finding pipeline.json in current directory."""
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path / "xdg_config"))
        config_file = tmp_path / "pipeline.json"
        config_file.write_text('{"seeds": [1]}')

        result = find_config_file()

        assert result is not None
        assert result.resolve() == config_file.resolve()

    def test_finds_config_in_xdg_dir(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """Test finding config in XDG config directory."""
        monkeypatch.chdir(tmp_path)
        xdg_config = tmp_path / "xdg_config"
        monkeypatch.setenv("XDG_CONFIG_HOME", str(xdg_config))

        config_dir = xdg_config / "wdp-triage"
        config_dir.mkdir(parents=True)
        config_file = config_dir / "pipeline.json"
        config_file.write_text('{"seeds": [1]}')

        result = find_config_file()

        assert result == config_file

    def test_current_dir_takes_precedence(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """Test current directory config takes precedence over XDG."""
        monkeypatch.chdir(tmp_path)

        xdg_config = tmp_path / "xdg_config"
        monkeypatch.setenv("XDG_CONFIG_HOME", str(xdg_config))
        config_dir = xdg_config / "wdp-triage"
        config_dir.mkdir(parents=True)
        (config_dir / "pipeline.json").write_text('{"seeds": [1]}')

        cwd_config = tmp_path / "pipeline.json"
        cwd_config.write_text('{"seeds": [2]}')

        result = find_config_file()

        assert result is not None
        assert result.resolve() == cwd_config.resolve()

    def test_returns_none_when_no_config(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """Test returns None when no config file exists."""
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path / "nonexistent"))

        assert find_config_file() is None
        assert not config_exists()


class TestLoadConfig:
    """Tests for load_config and merge_config."""

    def test_defaults_without_file(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """Test the defaults come back when no file exists."""
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path / "nonexistent"))

        config = load_config()

        assert config == create_default_config()
        assert config["seeds"] == DEFAULT_SEEDS
        assert config["bench"]["model_path"] is None

    def test_partial_override(self, tmp_path: Path) -> None:
        """Test keys left out keep their defaults."""
        config_file = tmp_path / "pipeline.json"
        config_file.write_text(json.dumps({"seeds": [7], "train": {"max_epochs": 5}}))

        config = load_config(config_file)

        assert config["seeds"] == [7]
        assert config["train"]["max_epochs"] == 5
        assert config["train"]["patience"] == 10
        assert config["generate"]["n_hard"] == 400

    def test_unknown_section(self) -> None:
        """Test an unknown section is rejected."""
        with pytest.raises(ConfigError, match="unknown config section 'solver'"):
            merge_config(create_default_config(), {"solver": {}})

    def test_unknown_key(self) -> None:
        """Test an unknown key is rejected with its dotted path."""
        with pytest.raises(ConfigError, match="'train.momentum'"):
            merge_config(create_default_config(), {"train": {"momentum": 0.9}})

    def test_section_must_be_object(self) -> None:
        """Test a scalar section is rejected."""
        with pytest.raises(ConfigError, match="must be an object"):
            merge_config(create_default_config(), {"bench": 3})

    def test_invalid_json(self, tmp_path: Path) -> None:
        """Test unparsable and missing files raise ConfigError."""
        bad = tmp_path / "pipeline.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError, match="Could not parse"):
            load_config(bad)
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "missing.json")

    def test_values_checked_against_default_types(self) -> None:
        """Test overrides must match the type of the value they replace."""
        defaults = create_default_config()
        cases = [
            ({"generate": {"n_hard": 2.5}}, "'generate.n_hard' must be an integer"),
            ({"label": {"time_limit": "soon"}}, "'label.time_limit' must be a number"),
            ({"ablation": {"enabled": "yes"}}, "'ablation.enabled' must be true or false"),
            ({"bench": {"mode": 1}}, "'bench.mode' must be a string"),
            ({"bench": {"model_path": 3}}, "'bench.model_path' must be a string or null"),
            ({"bench": {"budget_sweep": 16}}, "'bench.budget_sweep' must be a list"),
            ({"seeds": [1, "x"]}, "'seeds' must be an integer"),
        ]
        for overrides, message in cases:
            with pytest.raises(ConfigError, match=message):
                merge_config(defaults, overrides)

    def test_whole_numbers_are_coerced(self) -> None:
        """Test integral floats and digit strings become ints, ints become floats."""
        merged = merge_config(
            create_default_config(),
            {"generate": {"n_hard": 10.0, "fish_value_low": 25}, "seeds": ["7"]},
        )
        assert merged["generate"]["n_hard"] == 10
        assert isinstance(merged["generate"]["n_hard"], int)
        assert merged["generate"]["fish_value_low"] == 25.0
        assert isinstance(merged["generate"]["fish_value_low"], float)
        assert merged["seeds"] == [7]

    def test_save_and_reload(self, tmp_path: Path) -> None:
        """Test a saved config loads back unchanged."""
        config = create_default_config()
        config["seeds"] = [5, 6]
        path = save_json_config(config, tmp_path / "nested" / "pipeline.json")

        assert load_config(path) == config


class TestGetters:
    """Tests for the typed config getters."""

    def test_seeds(self) -> None:
        """Test seeds are read as ints and must not be empty."""
        assert get_seeds({"seeds": ["3", 4]}) == [3, 4]
        assert get_seeds(None) == DEFAULT_SEEDS
        with pytest.raises(ConfigError, match="empty"):
            get_seeds({"seeds": []})

    def test_mix_config(self) -> None:
        """Test the generate section becomes a MixConfig."""
        config = merge_config(create_default_config(), {"generate": {"n_hard": 12}})
        mix = get_mix_config(config)
        assert mix.n_hard == 12
        assert mix.n_easy == 400
        assert mix.rng_seed == 7

    def test_mix_config_invalid(self) -> None:
        """Test an out-of-range mix setting raises."""
        config = merge_config(create_default_config(), {"generate": {"k_min": 1}})
        with pytest.raises(ConfigError, match="generate"):
            get_mix_config(config)

    def test_train_config_uses_seed(self) -> None:
        """Test the run seed replaces rng_seed and extra keys are ignored."""
        train = get_train_config(create_default_config(), seed=123)
        assert train.rng_seed == 123
        assert train.max_epochs == 200

    def test_train_config_bad_type(self) -> None:
        """Test a non-numeric value raises at merge time and in the getter."""
        with pytest.raises(ConfigError, match="train.batch_size"):
            merge_config(create_default_config(), {"train": {"batch_size": "many"}})
        with pytest.raises(ConfigError, match="train.batch_size"):
            get_train_config({"train": {"batch_size": "many"}})

    def test_selector_config(self) -> None:
        """Test the bench section becomes a SelectorConfig."""
        config = merge_config(create_default_config(), {"bench": {"mode": "learned"}})
        assert get_selector_config(config).mode == "learned"
        bad = merge_config(create_default_config(), {"bench": {"time_limit": -1}})
        with pytest.raises(ConfigError, match="time_limit"):
            get_selector_config(bad)


class TestWorkerCount:
    """Tests for get_worker_count."""

    def test_default(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test unset or blank means one worker."""
        monkeypatch.delenv("WDP_TRIAGE_THREADS", raising=False)
        assert get_worker_count() == 1
        monkeypatch.setenv("WDP_TRIAGE_THREADS", " ")
        assert get_worker_count() == 1

    def test_from_env(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test the variable sets the worker count."""
        monkeypatch.setenv("WDP_TRIAGE_THREADS", "4")
        assert get_worker_count() == 4

    @pytest.mark.parametrize("raw", ["0", "-2", "four"])
    def test_invalid(self, monkeypatch: pytest.MonkeyPatch, raw: str) -> None:
        """Test non-positive and non-integer values raise."""
        monkeypatch.setenv("WDP_TRIAGE_THREADS", raw)
        with pytest.raises(ConfigError, match="WDP_TRIAGE_THREADS"):
            get_worker_count()
