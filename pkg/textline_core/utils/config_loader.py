import copy
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import yaml

from .errors import ConfigError

PROJECT_ROOT = Path(__file__).parent.parent.parent
RESOLVED_CONFIG_NAME = "config.resolved.txt"

FEATURE_MODES = ("per_level", "whole")
MODEL_KINDS = ("blstm_1d", "mdlstm_2d")
VALIDATE_ON = ("validation", "train")


def load_config(config_file="config/settings.yaml"):
    """
    Load configuration from YAML file.

    Args:
        config_file: Path to configuration file, absolute or relative to the project root

    Returns:
        Dictionary containing configuration, file values merged over the defaults
    """
    config_path = Path(config_file)
    if not config_path.is_absolute() and not config_path.exists():
        config_path = PROJECT_ROOT / config_file

    config = get_default_config()
    if not config_path.exists():
        # Return default config if file doesn't exist
        return config

    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            loaded = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"{config_path}: not valid YAML ({e})") from e
    if not isinstance(loaded, dict):
        raise ConfigError(f"{config_path}: top level must be a mapping")

    config.update(loaded)
    return config


def get_default_config():
    """Return default run configuration (x-height 60, 6 levels, height floor 30, 100 units)."""
    return asdict(RunConfig())


@dataclass
class RunConfig:
    """Fully resolved settings for one CLI run."""

    xheight: int = 60
    max_levels: int = 6
    min_height: int = 30
    base_height: Optional[int] = None
    feature_mode: str = "per_level"
    model_kind: str = "mdlstm_2d"
    hidden_units: int = 100
    hidden_units_sweep: List[int] = field(default_factory=lambda: [20, 40, 60, 80, 100])
    seeds: List[int] = field(default_factory=lambda: [1, 2, 3])
    split_ratios: List[float] = field(default_factory=lambda: [0.8, 0.1, 0.1])
    split_seed: int = 0
    validate_on: str = "validation"
    workers: int = 1
    learning_rate: float = 1e-4
    momentum: float = 0.9
    max_epochs: int = 200
    patience: int = 20
    shuffle_seed: int = 0
    glyph_count: int = 10
    line_count: int = 20
    line_length_range: List[int] = field(default_factory=lambda: [3, 8])
    noise_level: float = 0.0
    synth_seed: int = 7
    manifest: Optional[str] = None
    inputs: List[str] = field(default_factory=list)
    model_dir: Optional[str] = None
    out_dir: Optional[str] = None

    def __post_init__(self):
        if self.xheight < 1:
            raise ConfigError(f"xheight must be >= 1, got {self.xheight}")
        if not 1 <= self.max_levels <= 6:
            raise ConfigError(f"max_levels must be in [1, 6], got {self.max_levels}")
        if self.min_height < 2:
            raise ConfigError(f"min_height must be >= 2, got {self.min_height}")
        if self.base_height is not None and self.base_height < 1:
            raise ConfigError(f"base_height must be >= 1, got {self.base_height}")
        if self.feature_mode not in FEATURE_MODES:
            raise ConfigError(f"feature_mode must be one of {FEATURE_MODES}, got {self.feature_mode!r}")
        if self.model_kind not in MODEL_KINDS:
            raise ConfigError(f"model_kind must be one of {MODEL_KINDS}, got {self.model_kind!r}")
        if self.validate_on not in VALIDATE_ON:
            raise ConfigError(f"validate_on must be one of {VALIDATE_ON}, got {self.validate_on!r}")
        if self.hidden_units < 1:
            raise ConfigError(f"hidden_units must be >= 1, got {self.hidden_units}")
        if not self.seeds:
            raise ConfigError("seeds must list at least one seed")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise ConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.max_epochs < 1 or self.patience < 1 or self.workers < 1:
            raise ConfigError("max_epochs, patience and workers must be >= 1")
        if not self.hidden_units_sweep or min(self.hidden_units_sweep) < 1:
            raise ConfigError(f"hidden_units_sweep must list unit counts >= 1, got {self.hidden_units_sweep}")
        if len(self.split_ratios) != 3:
            raise ConfigError(f"split_ratios must have 3 entries, got {self.split_ratios}")
        if len(self.line_length_range) != 2:
            raise ConfigError(f"line_length_range must be [min, max], got {self.line_length_range}")

    @classmethod
    def from_dict(cls, values):
        """Build a RunConfig, rejecting keys it does not know."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**copy.deepcopy(values))

    def to_dict(self):
        return asdict(self)


def resolve_run_config(config_file=None, overrides=None):
    """
    Load a config file and apply CLI overrides on top.

    Args:
        config_file: YAML file path (defaults to config/settings.yaml)
        overrides: Mapping of keys to values; None values are ignored

    Returns:
        RunConfig instance
    """
    values = load_config(config_file or "config/settings.yaml")
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return RunConfig.from_dict(values)


def write_resolved_config(run_config, out_dir):
    """
    Write the fully resolved config next to a run's outputs.

    Args:
        run_config: RunConfig instance
        out_dir: Output directory (created if missing)

    Returns:
        Path of the written file
    """
    out_path = Path(out_dir) / RESOLVED_CONFIG_NAME
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(run_config.to_dict(), f, sort_keys=True, default_flow_style=False)
    return out_path
