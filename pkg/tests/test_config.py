"""Run configuration loading, overrides and the resolved-config file."""
import pytest
import yaml

from textline_core.utils.config_loader import (
    RESOLVED_CONFIG_NAME,
    RunConfig,
    get_default_config,
    load_config,
    resolve_run_config,
    write_resolved_config,
)
from textline_core.utils.errors import ConfigError


def _write(tmp_path, text):
    path = tmp_path / "settings.yaml"
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadConfig:
    def test_defaults(self):
        config = get_default_config()
        assert config["xheight"] == 60
        assert config["max_levels"] == 6
        assert config["min_height"] == 30
        assert config["hidden_units"] == 100
        assert config["split_ratios"] == [0.8, 0.1, 0.1]

    def test_missing_file_gives_defaults(self, tmp_path):
        assert load_config(tmp_path / "absent.yaml") == get_default_config()

    def test_file_merged_over_defaults(self, tmp_path):
        config = load_config(_write(tmp_path, "xheight: 24\nseeds: [4, 5]\n"))
        assert config["xheight"] == 24
        assert config["seeds"] == [4, 5]
        assert config["max_levels"] == 6

    def test_invalid_yaml(self, tmp_path):
        with pytest.raises(ConfigError, match="YAML"):
            load_config(_write(tmp_path, "xheight: [1,\n"))

    def test_non_mapping(self, tmp_path):
        with pytest.raises(ConfigError, match="mapping"):
            load_config(_write(tmp_path, "- 1\n- 2\n"))

    def test_shipped_settings_resolve(self):
        assert RunConfig.from_dict(load_config()) == RunConfig()

    @pytest.mark.parametrize("name", ["overfit_fixture.yaml", "trend_experiment.yaml"])
    def test_shipped_experiments_resolve(self, name):
        run_config = resolve_run_config(f"config/{name}")
        assert run_config.model_kind == "blstm_1d"


class TestRunConfig:
    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown config keys: colour"):
            RunConfig.from_dict({"colour": 1})

    @pytest.mark.parametrize("values", [
        {"xheight": 0},
        {"max_levels": 7},
        {"min_height": 1},
        {"feature_mode": "sideways"},
        {"model_kind": "gru"},
        {"seeds": []},
        {"momentum": 1.0},
        {"hidden_units_sweep": []},
        {"split_ratios": [0.5, 0.5]},
        {"line_length_range": [3]},
        {"validate_on": "test"},
    ])
    def test_rejects_invalid(self, values):
        with pytest.raises(ConfigError):
            RunConfig(**values)

    def test_overrides_skip_none(self, tmp_path):
        path = _write(tmp_path, "xheight: 24\nhidden_units: 40\n")
        run_config = resolve_run_config(path, {"xheight": 12, "hidden_units": None})
        assert run_config.xheight == 12
        assert run_config.hidden_units == 40

    def test_resolved_file_round_trips(self, tmp_path):
        run_config = resolve_run_config(None, {"xheight": 16, "out_dir": str(tmp_path)})
        path = write_resolved_config(run_config, tmp_path / "run")
        assert path.name == RESOLVED_CONFIG_NAME
        values = yaml.safe_load(path.read_text(encoding="utf-8"))
        assert RunConfig.from_dict(values) == run_config
        assert list(values) == sorted(values)
