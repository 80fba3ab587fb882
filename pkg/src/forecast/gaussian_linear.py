"""
Linear model with a Gaussian head (mean and softplus variance) trained by NLL
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from src.data.forecast_set import QuantileForecastSet, point_level_for, validate_levels
from src.features.builder import FeatureMatrix
from src.forecast.forecaster import FoldContext, Forecaster
from src.forecast.linear_quantile import check_design
from src.forecast.training import TrainingOptions, TrainingTrace, subgradient_descent
from src.objectives.config import ObjectiveConfig
from src.objectives.losses import gaussian_nll, gaussian_nll_gradient, softplus
from src.utils.errors import ColumnMismatch, ConfigError

logger = logging.getLogger(__name__)

# softplus(UNIT_VARIANCE_LOGIT) == 1
UNIT_VARIANCE_LOGIT = float(np.log(np.expm1(1.0)))


@dataclass
class GaussianLinearModel:
    """
    mu = b_mu + X w_mu and sigma^2 = softplus(b_s + X w_s) on the standardized target
    """
    quantiles: Tuple[float, ...]
    columns: Tuple[str, ...]
    weights_mu: np.ndarray
    bias_mu: float
    weights_s: np.ndarray
    bias_s: float
    target_mean: float
    target_std: float
    trace: TrainingTrace = field(default_factory=TrainingTrace)

    def moments(self, features: FeatureMatrix) -> Tuple[np.ndarray, np.ndarray]:
        """
        Mean and variance in MW and MW^2
        """
        if tuple(features.columns) != tuple(self.columns):
            raise ColumnMismatch("Feature columns differ from the fitted model",
                                 {"model": list(self.columns), "features": list(features.columns)})
        mu = self.bias_mu + features.values @ self.weights_mu
        sigma2 = softplus(self.bias_s + features.values @ self.weights_s)
        return self.target_mean + self.target_std * mu, sigma2 * self.target_std ** 2

    def predict(self, features: FeatureMatrix) -> QuantileForecastSet:
        mean, variance = self.moments(features)
        z = norm.ppf(np.asarray(self.quantiles))
        predictions = mean[:, :, None] + np.sqrt(variance)[:, :, None] * z[None, None, :]
        return QuantileForecastSet(features.issue_times, features.lead_hours, np.asarray(self.quantiles),
                                   predictions, features.targets, point_level_for(self.quantiles))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "quantiles": list(self.quantiles),
            "columns": list(self.columns),
            "weights": [self.weights_mu.tolist(), self.weights_s.tolist()],
            "intercepts": [float(self.bias_mu), float(self.bias_s)],
            "target_mean": float(self.target_mean),
            "target_std": float(self.target_std),
        }

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "GaussianLinearModel":
        weights_mu, weights_s = (np.asarray(w, dtype=float) for w in raw["weights"])
        bias_mu, bias_s = raw["intercepts"]
        return cls(tuple(raw["quantiles"]), tuple(raw["columns"]), weights_mu, float(bias_mu),
                   weights_s, float(bias_s), float(raw["target_mean"]), float(raw["target_std"]))


def _nll_objective(features: FeatureMatrix, mean: float, std: float):
    z_targets = (features.targets - mean) / std

    def objective(params, index):
        values = features.values[index]
        y = z_targets[index]
        mu = params["bias_mu"] + values @ params["weights_mu"]
        s = params["bias_s"] + values @ params["weights_s"]
        sigma2 = softplus(s)
        loss = float(np.mean(gaussian_nll(y, mu, sigma2)))
        d_mu, d_sigma2 = gaussian_nll_gradient(y, mu, sigma2)
        d_mu = d_mu / y.size
        d_s = d_sigma2 * expit(s) / y.size
        grads = {
            "weights_mu": np.einsum("ihc,ih->c", values, d_mu),
            "bias_mu": np.array(d_mu.sum()),
            "weights_s": np.einsum("ihc,ih->c", values, d_s),
            "bias_s": np.array(d_s.sum()),
        }
        return loss, grads
    return objective


def fit_gaussian_model(features: FeatureMatrix, quantiles: Sequence[float],
                       options: Optional[TrainingOptions] = None, seed: int = 0,
                       validation: Optional[FeatureMatrix] = None) -> GaussianLinearModel:
    """
    Fit the Gaussian head by subgradient descent on the mean NLL

    Args:
        features (FeatureMatrix): Training rows
        quantiles (sequence): Levels emitted at prediction time
        options (TrainingOptions, optional): Optimizer settings
        seed (int): Mini-batch permutation seed
        validation (FeatureMatrix, optional): Early-stopping rows

    Returns:
        GaussianLinearModel: Fitted model
    """
    options = options or TrainingOptions()
    levels = tuple(float(q) for q in validate_levels(quantiles))
    check_design(features)
    mean = float(np.mean(features.targets))
    std = float(np.std(features.targets)) or 1.0
    n_cols = len(features.columns)
    params = {
        "weights_mu": np.zeros(n_cols),
        "bias_mu": np.array(0.0),
        "weights_s": np.zeros(n_cols),
        "bias_s": np.array(UNIT_VARIANCE_LOGIT),
    }
    check = None
    if validation is not None and len(validation) > 0:
        val_objective = _nll_objective(validation, mean, std)
        everything = np.arange(len(validation))

        def check(current):
            return val_objective(current, everything)[0]

    best, trace = subgradient_descent(params, _nll_objective(features, mean, std), len(features),
                                      options, {}, seed, check)
    logger.info(f"Fitted Gaussian linear model on {len(features)} issue times (best epoch {trace.best_epoch})")
    return GaussianLinearModel(levels, tuple(features.columns), best["weights_mu"], float(best["bias_mu"]),
                               best["weights_s"], float(best["bias_s"]), mean, std, trace)


class GaussianLinearForecaster(Forecaster):
    """
    Forecaster wrapper around the Gaussian-head linear model
    """

    name = "gaussian_linear"

    def __init__(self, objective: ObjectiveConfig, config: Optional[Dict[str, Any]] = None, seed: int = 0):
        super().__init__(objective, config, seed)
        self.model: Optional[GaussianLinearModel] = None

    def fit(self, context: FoldContext) -> "GaussianLinearForecaster":
        self.fit_normalizer(context)
        train = self.features(context, context.train_issues)
        validation = self.features(context, context.validation_issues) if len(context.validation_issues) else None
        self.model = fit_gaussian_model(train, self.objective.quantiles, self.options, self.seed, validation)
        return self

    def predict(self, context: FoldContext, issue_times) -> QuantileForecastSet:
        if self.model is None:
            raise ConfigError("Forecaster is not fitted", {"model": self.name})
        return self.model.predict(self.features(context, issue_times))

    def parameters(self) -> Dict[str, Any]:
        if self.model is None:
            raise ConfigError("Forecaster is not fitted", {"model": self.name})
        return self.model.to_dict()
