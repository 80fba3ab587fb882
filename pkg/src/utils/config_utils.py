"""
Experiment configuration: strict parsing of YAML, TOML or JSON files
"""
import dataclasses
import json
import logging
import os
import tomllib
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Type, TypeVar

import yaml

from src.backtest.schedule import ScheduleParams
from src.data.align import GapPolicy
from src.features.builder import BtmSettings, FeatureSettings
from src.metrics.report import ReportSettings
from src.objectives.config import ObjectiveConfig
from src.utils.errors import ConfigError, GridRiskError
from src.utils.file_utils import canonical_json, short_hash

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class DataConfig:
    """
    Input files (OASIS exports are optional) and the alignment policy
    """
    load: Optional[str] = None
    weather: Optional[str] = None
    lmp_da: Optional[str] = None
    lmp_rt: Optional[str] = None
    sld_fcst: Optional[str] = None
    area: Optional[str] = None
    grid: str = "union"
    fill: str = "drop"
    fill_limit: int = 3

    @property
    def gap_policy(self) -> GapPolicy:
        return GapPolicy(self.grid, self.fill, self.fill_limit)


@dataclass(frozen=True)
class ForecasterConfig:
    """
    Models to run, objective variants for the trained ones, and optimizer settings

    ``variants`` maps a variant name to overrides of the objective section;
    an empty mapping runs the objective as configured under the name 'default'.
    """
    models: Tuple[str, ...] = ("seasonal_naive", "linear_quantile")
    variants: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    learning_rate: float = 0.05
    epochs: int = 150
    batch_size: int = 64
    patience: int = 60

    def hyperparameters(self) -> Dict[str, Any]:
        return {"learning_rate": self.learning_rate, "epochs": self.epochs,
                "batch_size": self.batch_size, "patience": self.patience}


@dataclass(frozen=True)
class ReportConfig:
    out_dir: str = "output"
    formats: Tuple[str, ...] = ("json", "csv", "markdown")
    template_dir: Optional[str] = "config/templates"
    percentile_p: float = 99.5
    thresholds: Tuple[float, ...] = (1000.0, 1500.0, 2000.0)
    per_lead: Tuple[int, ...] = (1, 6, 12, 24)
    reserve_leads: str = "all"

    def settings(self, h_star: int) -> ReportSettings:
        return ReportSettings(self.percentile_p, h_star, tuple(float(t) for t in self.thresholds),
                              tuple(int(h) for h in self.per_lead), self.reserve_leads)


@dataclass(frozen=True)
class LoggingConfig:
    level: str = "INFO"
    file: Optional[str] = None


@dataclass(frozen=True)
class FeatureConfig:
    """
    Feature settings plus how the weather lags are chosen

    ``lags`` fixes lags per weather kind; kinds not listed are scanned with
    lag_scan on the training history when ``scan_lags`` is true, else use 0.
    """
    settings: FeatureSettings = field(default_factory=FeatureSettings)
    lags: Dict[str, int] = field(default_factory=dict)
    scan_lags: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    data: DataConfig = field(default_factory=DataConfig)
    schedule: ScheduleParams = field(default_factory=ScheduleParams)
    objective: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    forecaster: ForecasterConfig = field(default_factory=ForecasterConfig)
    report: ReportConfig = field(default_factory=ReportConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    seed: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        raw = dataclasses.asdict(self)
        features = raw.pop("features")
        raw["features"] = dict(features["settings"], lags=features["lags"], scan_lags=features["scan_lags"])
        return _jsonable(raw)

    def config_hash(self) -> str:
        """
        SHA-256 prefix of the canonical JSON of the parsed config
        """
        return short_hash(canonical_json(self.to_dict()))

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("A seed is required for training and backtesting (config 'seed' or --seed)")
        return int(self.seed)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _build(cls: Type[T], raw: Any, path: str, nested: Optional[Dict[str, Any]] = None) -> T:
    """
    Construct a dataclass from a mapping, rejecting unknown keys

    Args:
        cls: Dataclass type
        raw: Mapping from the config file (None means defaults)
        path (str): Dotted path used in error messages
        nested (dict, optional): field name -> builder for nested sections
    """
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"Section '{path}' must be a mapping", {"path": path, "type": type(raw).__name__})
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - names)
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(f'{path}.{k}' for k in unknown)}",
                          {"path": path, "unknown": unknown, "allowed": sorted(names)})
    values = {}
    for key, value in raw.items():
        if nested and key in nested:
            values[key] = nested[key](value, f"{path}.{key}")
        elif isinstance(value, list):
            values[key] = tuple(value)
        else:
            values[key] = value
    try:
        return cls(**values)
    except GridRiskError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid values in section '{path}': {e}", {"path": path}) from e


def _features(raw: Any, path: str) -> FeatureConfig:
    raw = dict(raw or {})
    lags = raw.pop("lags", {}) or {}
    scan_lags = raw.pop("scan_lags", True)
    if not isinstance(lags, dict):
        raise ConfigError(f"'{path}.lags' must map weather kinds to hours", {"path": path})
    settings = _build(FeatureSettings, raw, path,
                      {"btm": lambda value, sub: _build(BtmSettings, value, sub)})
    return FeatureConfig(settings, {str(k): int(v) for k, v in lags.items()}, bool(scan_lags))


def _objective(raw: Any, path: str) -> ObjectiveConfig:
    if raw is None:
        return ObjectiveConfig()
    if not isinstance(raw, dict):
        raise ConfigError(f"Section '{path}' must be a mapping", {"path": path})
    try:
        return ObjectiveConfig.from_dict(raw)
    except GridRiskError as e:
        raise ConfigError(f"{path}: {e.message}", dict(e.context, path=path)) from e
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid values in section '{path}': {e}", {"path": path}) from e


def _forecaster(raw: Any, path: str) -> ForecasterConfig:
    config = _build(ForecasterConfig, raw, path)
    variants = config.variants or {}
    if not isinstance(variants, dict):
        raise ConfigError(f"'{path}.variants' must be a mapping of name to objective overrides")
    return dataclasses.replace(config, variants={str(k): dict(v or {}) for k, v in variants.items()})


def config_from_dict(raw: Dict[str, Any]) -> ExperimentConfig:
    """
    Strictly parse a config mapping

    Raises:
        ConfigError: Unknown key (dotted path in the message) or invalid value
    """
    return _build(ExperimentConfig, raw, "config", {
        "data": lambda value, path: _build(DataConfig, value, path),
        "schedule": lambda value, path: _build(ScheduleParams, value, path),
        "objective": _objective,
        "features": _features,
        "forecaster": _forecaster,
        "report": lambda value, path: _build(ReportConfig, value, path),
        "logging": lambda value, path: _build(LoggingConfig, value, path),
    })


def read_config_file(config_path: str) -> Dict[str, Any]:
    """
    Read a config file; the format follows the extension (.yaml/.yml, .toml, .json)
    """
    if not os.path.isfile(config_path):
        raise ConfigError(f"Configuration file not found: {config_path}", {"path": config_path})
    extension = os.path.splitext(config_path)[1].lower()
    try:
        if extension in ('.yaml', '.yml'):
            with open(config_path, 'r', encoding='utf-8') as file:
                return yaml.safe_load(file) or {}
        if extension == '.toml':
            with open(config_path, 'rb') as file:
                return tomllib.load(file)
        if extension == '.json':
            with open(config_path, 'r', encoding='utf-8') as file:
                return json.load(file)
    except (yaml.YAMLError, tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot parse {config_path}: {e}", {"path": config_path}) from e
    raise ConfigError(f"Unsupported config format: {extension}", {"path": config_path,
                                                                  "allowed": [".yaml", ".yml", ".toml", ".json"]})


def load_config(config_path: str) -> ExperimentConfig:
    """
    Load and strictly parse an experiment config

    Args:
        config_path (str): Path to a YAML, TOML or JSON file

    Returns:
        ExperimentConfig: Parsed configuration
    """
    config = config_from_dict(read_config_file(config_path))
    logger.debug(f"Loaded config {config_path} (hash {config.config_hash()})")
    return config
