"""
Forecaster interface shared by the backtest harness and the CLI
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Optional

import pandas as pd

from src.data.align import AlignedFrame
from src.data.forecast_set import QuantileForecastSet
from src.data.normalize import NormalizerState, fit_normalizer
from src.data.series import TimeRange
from src.features.builder import FeatureBuilder, FeatureMatrix
from src.forecast.training import TrainingOptions
from src.objectives.config import ObjectiveConfig
from src.utils.errors import ConfigError
from src.utils.file_utils import write_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FoldContext:
    """
    Everything a forecaster may see when fitting one fold

    Attributes:
        frame: full aligned data (models only read rows up to train_range.end)
        builder: shared feature builder
        train_range: rows available for normalization statistics
        train_issues: issue times whose targets precede the validation window
        validation_issues: issue times scored for early stopping
        fold_index: walk-forward fold number (0 for fixed split)
    """
    frame: AlignedFrame
    builder: FeatureBuilder
    train_range: TimeRange
    train_issues: pd.DatetimeIndex
    validation_issues: pd.DatetimeIndex
    fold_index: int = 0


class Forecaster(ABC):
    """
    Abstract base class for forecasters
    """

    name = "base"

    def __init__(self, objective: ObjectiveConfig, config: Optional[Dict[str, Any]] = None, seed: int = 0):
        """
        Initialize the forecaster

        Args:
            objective (ObjectiveConfig): Training objective and quantile levels
            config (dict, optional): Hyperparameters
            seed (int): Training seed
        """
        self.objective = objective
        self.config = dict(config or {})
        self.seed = seed
        self.normalizer: Optional[NormalizerState] = None

        self.options = TrainingOptions(
            learning_rate=self.config.get('learning_rate', 0.05),
            epochs=self.config.get('epochs', 150),
            batch_size=self.config.get('batch_size', 64),
            patience=self.config.get('patience', 60),
        )
        logger.debug(f"Initialized {self.__class__.__name__} with config: {self.config}")

    @abstractmethod
    def fit(self, context: FoldContext) -> "Forecaster":
        """
        Fit on the training rows of a fold

        Args:
            context (FoldContext): Fold data

        Returns:
            Forecaster: self
        """
        pass

    @abstractmethod
    def predict(self, context: FoldContext, issue_times: pd.DatetimeIndex) -> QuantileForecastSet:
        """
        Forecast leads 1..H at each issue time

        Args:
            context (FoldContext): Fold data
            issue_times (pd.DatetimeIndex): Gap-free issue times

        Returns:
            QuantileForecastSet: Forecasts with the realized actuals
        """
        pass

    @abstractmethod
    def parameters(self) -> Dict[str, Any]:
        """
        Fitted parameters as a JSON-ready dict with quantiles, columns, weights and intercepts
        """
        pass

    def fit_normalizer(self, context: FoldContext) -> NormalizerState:
        builder = context.builder
        channels = [builder.load_column] + list(builder.weather_columns.values())
        self.normalizer = fit_normalizer(context.frame, context.train_range, channels)
        return self.normalizer

    def features(self, context: FoldContext, issue_times) -> FeatureMatrix:
        return context.builder.build(context.frame, issue_times, self.normalizer)

    def to_checkpoint(self, config_hash: str = "") -> Dict[str, Any]:
        checkpoint = {"model": self.name, "seed": self.seed, "config_hash": config_hash}
        checkpoint.update(self.parameters())
        if self.normalizer is not None:
            checkpoint["normalizer"] = self.normalizer.to_dict()
        return checkpoint

    def save(self, path: str, config_hash: str = "") -> str:
        logger.info(f"Saving {self.name} checkpoint to {path}")
        return write_json(path, self.to_checkpoint(config_hash))


class ForecasterFactory:
    """
    Factory class to create forecasters by name
    """

    names = ("seasonal_naive", "linear_quantile", "gaussian_linear")

    def get_forecaster(self, name: str, objective: ObjectiveConfig, config: Optional[Dict[str, Any]] = None,
                       seed: int = 0) -> Forecaster:
        """
        Get a fresh forecaster

        Args:
            name (str): 'seasonal_naive', 'linear_quantile' or 'gaussian_linear'
            objective (ObjectiveConfig): Training objective
            config (dict, optional): Hyperparameters
            seed (int): Training seed

        Returns:
            Forecaster: Unfitted instance

        Raises:
            ConfigError: If the name is not supported
        """
        name = name.lower()

        if name == 'seasonal_naive':
            from src.forecast.seasonal_naive import SeasonalNaiveForecaster
            return SeasonalNaiveForecaster(objective, config, seed)
        elif name == 'linear_quantile':
            from src.forecast.linear_quantile import LinearQuantileForecaster
            return LinearQuantileForecaster(objective, config, seed)
        elif name == 'gaussian_linear':
            from src.forecast.gaussian_linear import GaussianLinearForecaster
            return GaussianLinearForecaster(objective, config, seed)
        else:
            raise ConfigError(f"Unsupported forecaster: {name}", {"name": name, "allowed": list(self.names)})
