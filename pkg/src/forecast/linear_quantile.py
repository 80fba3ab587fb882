"""
Linear multi-quantile model trained on the constrained objective
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.data.forecast_set import QuantileBatch, QuantileForecastSet, point_level_for
from src.features.builder import FeatureMatrix
from src.forecast.forecaster import FoldContext, Forecaster
from src.forecast.training import TrainingOptions, TrainingTrace, subgradient_descent
from src.objectives.config import ObjectiveConfig
from src.objectives.losses import combined_objective
from src.utils.errors import ColumnMismatch, ConfigError, DataError, DegenerateDesign

logger = logging.getLogger(__name__)


@dataclass
class LinearQuantileModel:
    """
    One weight vector and intercept per quantile level

    Attributes:
        weights: [column x level]
        intercepts: [level] in MW
    """
    quantiles: Tuple[float, ...]
    columns: Tuple[str, ...]
    weights: np.ndarray
    intercepts: np.ndarray
    point_level: float = 0.5
    trace: TrainingTrace = field(default_factory=TrainingTrace)

    def raw_predictions(self, features: FeatureMatrix) -> np.ndarray:
        if tuple(features.columns) != tuple(self.columns):
            raise ColumnMismatch("Feature columns differ from the fitted model",
                                 {"model": list(self.columns), "features": list(features.columns)})
        return self.intercepts[None, None, :] + np.einsum("ihc,ck->ihk", features.values, self.weights)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "quantiles": list(self.quantiles),
            "columns": list(self.columns),
            "weights": self.weights.T.tolist(),
            "intercepts": self.intercepts.tolist(),
        }

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "LinearQuantileModel":
        quantiles = tuple(raw["quantiles"])
        columns = tuple(raw["columns"])
        weights = np.asarray(raw["weights"], dtype=float).reshape(len(quantiles), len(columns)).T
        return cls(quantiles, columns, weights, np.asarray(raw["intercepts"], dtype=float),
                   point_level_for(quantiles))


def predict_quantiles(model: LinearQuantileModel, features: FeatureMatrix) -> QuantileForecastSet:
    """
    Predict every level and sort per point so levels never cross

    Raises:
        ColumnMismatch: If the feature columns differ from the model's
    """
    predictions = np.sort(model.raw_predictions(features), axis=2)
    return QuantileForecastSet(features.issue_times, features.lead_hours, np.asarray(model.quantiles),
                               predictions, features.targets, model.point_level)


def check_design(features: FeatureMatrix) -> None:
    n_rows, n_cols = features.n_rows, len(features.columns)
    if n_rows < n_cols + 1:
        raise DegenerateDesign("Fewer training rows than parameters per level",
                               {"rows": n_rows, "columns": n_cols})
    if not np.isfinite(features.values).all():
        raise DataError("Training features contain non-finite values")
    if not np.isfinite(features.targets).all():
        raise DataError("Training targets contain missing values")
    flat = features.values.reshape(-1, n_cols)
    constant = [name for name, spread in zip(features.columns, np.ptp(flat, axis=0) if n_cols else []) if spread == 0]
    if constant:
        raise DegenerateDesign("Constant feature columns in the training rows", {"columns": constant})


def _batch_objective(features: FeatureMatrix, cfg: ObjectiveConfig):
    def objective(params, index):
        values = features.values[index]
        predictions = params["intercepts"][None, None, :] + np.einsum("ihc,ck->ihk", values, params["weights"])
        batch = QuantileBatch(predictions, features.targets[index], cfg.levels, features.lead_hours)
        value = combined_objective(batch, cfg)
        grads = {
            "weights": np.einsum("ihc,ihk->ck", values, value.gradient),
            "intercepts": value.gradient.sum(axis=(0, 1)),
        }
        return value.loss, grads
    return objective


def fit_quantile_model(features: FeatureMatrix, cfg: ObjectiveConfig, options: Optional[TrainingOptions] = None,
                       seed: int = 0, validation: Optional[FeatureMatrix] = None) -> LinearQuantileModel:
    """
    Fit per-level weights by subgradient descent on combined_objective

    Intercepts start at the empirical training quantiles and weights at zero.
    The step is scaled by the standard deviation of the training target.

    Args:
        features (FeatureMatrix): Training rows (targets required)
        cfg (ObjectiveConfig): Objective and its levels
        options (TrainingOptions, optional): Optimizer settings
        seed (int): Mini-batch permutation seed
        validation (FeatureMatrix, optional): Early-stopping rows

    Returns:
        LinearQuantileModel: Parameters with the best early-stopping score

    Raises:
        DegenerateDesign: Too few rows or a constant column
        DivergedLoss: Loss blew up
    """
    options = options or TrainingOptions()
    check_design(features)
    targets = features.targets
    scale = float(np.std(targets))
    params = {
        "weights": np.zeros((len(features.columns), len(cfg.quantiles))),
        "intercepts": np.quantile(targets.ravel(), cfg.levels),
    }
    check = None
    if validation is not None and len(validation) > 0:
        val_objective = _batch_objective(validation, cfg)
        everything = np.arange(len(validation))

        def check(current):
            return val_objective(current, everything)[0]

    best, trace = subgradient_descent(
        params, _batch_objective(features, cfg), len(features), options,
        {"weights": scale if scale > 0 else 1.0, "intercepts": scale if scale > 0 else 1.0},
        seed, check,
    )
    logger.info(f"Fitted linear quantile model on {len(features)} issue times: "
                f"loss {trace.train_loss[0]:.4g} -> {min(trace.train_loss):.4g} (best epoch {trace.best_epoch})")
    return LinearQuantileModel(tuple(cfg.quantiles), tuple(features.columns), best["weights"],
                               best["intercepts"], cfg.point_level, trace)


class LinearQuantileForecaster(Forecaster):
    """
    Forecaster wrapper: train-only normalization, features, constrained fit
    """

    name = "linear_quantile"

    def __init__(self, objective: ObjectiveConfig, config: Optional[Dict[str, Any]] = None, seed: int = 0):
        super().__init__(objective, config, seed)
        self.model: Optional[LinearQuantileModel] = None

    def fit(self, context: FoldContext) -> "LinearQuantileForecaster":
        self.fit_normalizer(context)
        train = self.features(context, context.train_issues)
        validation = self.features(context, context.validation_issues) if len(context.validation_issues) else None
        self.model = fit_quantile_model(train, self.objective, self.options, self.seed, validation)
        return self

    def predict(self, context: FoldContext, issue_times) -> QuantileForecastSet:
        if self.model is None:
            raise ConfigError("Forecaster is not fitted", {"model": self.name})
        return predict_quantiles(self.model, self.features(context, issue_times))

    def parameters(self) -> Dict[str, Any]:
        if self.model is None:
            raise ConfigError("Forecaster is not fitted", {"model": self.name})
        return self.model.to_dict()
