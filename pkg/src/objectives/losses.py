"""
Training objectives with hand-derived (sub)gradients

Gradients are taken with respect to the prediction tensor of a QuantileBatch
([issue x lead x level]). At a pinball kink (y == q_hat) the subgradient is
fixed to the (1 - q) side; at a hinge kink the inactive side (zero) is used.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from src.data.forecast_set import QuantileBatch
from src.objectives.config import ObjectiveConfig
from src.utils.errors import InvalidLevel, NonPositiveVariance, ShapeMismatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ObjectiveValue:
    loss: float
    gradient: np.ndarray

    def __add__(self, other: "ObjectiveValue") -> "ObjectiveValue":
        return ObjectiveValue(self.loss + other.loss, self.gradient + other.gradient)


def softplus(x):
    return np.logaddexp(0.0, x)


def _check_level(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise InvalidLevel("Quantile level must lie strictly inside (0, 1)", {"q": q})


def pinball(y, q_hat, q: float):
    """
    Pinball loss max(q (y - q_hat), (q - 1)(y - q_hat))
    """
    _check_level(q)
    diff = np.asarray(y, dtype=float) - np.asarray(q_hat, dtype=float)
    loss = np.maximum(q * diff, (q - 1.0) * diff)
    return float(loss) if np.ndim(loss) == 0 else loss


def pinball_gradient(y, q_hat, q: float):
    """
    Subgradient of the pinball loss with respect to q_hat: -q if y > q_hat, else 1 - q
    """
    _check_level(q)
    grad = np.where(np.asarray(y, dtype=float) > np.asarray(q_hat, dtype=float), -q, 1.0 - q)
    return float(grad) if np.ndim(grad) == 0 else grad


def _check_batch(batch: QuantileBatch, cfg: ObjectiveConfig) -> None:
    if batch.quantile_levels.shape != cfg.levels.shape or not np.allclose(batch.quantile_levels, cfg.levels):
        raise ShapeMismatch("Prediction levels do not match the objective's quantiles",
                            {"batch": batch.quantile_levels.tolist(), "config": list(cfg.quantiles)})


def multi_quantile_loss(batch: QuantileBatch, cfg: ObjectiveConfig) -> ObjectiveValue:
    """
    Sum over levels of w_q times the pinball loss averaged over issues and leads

    Returns:
        ObjectiveValue: Scalar loss and gradient shaped like the predictions
    """
    _check_batch(batch, cfg)
    n_issue, n_lead, _ = batch.predictions.shape
    y = batch.actuals[:, :, None]
    levels = cfg.levels[None, None, :]
    diff = y - batch.predictions
    losses = np.maximum(levels * diff, (levels - 1.0) * diff)
    scale = cfg.weight_array[None, None, :] / (n_issue * n_lead)
    loss = float(np.sum(losses * scale))
    gradient = np.where(diff > 0, -levels, 1.0 - levels) * scale
    return ObjectiveValue(loss, gradient)


def scheduled_bias(batch: QuantileBatch, cfg: ObjectiveConfig) -> float:
    """
    Batch mean of scheduled-level prediction minus actual at h_star
    """
    col = batch.lead_index(cfg.h_star)
    level = batch.level_index(cfg.point_level)
    return float(np.mean(batch.predictions[:, col, level] - batch.actuals[:, col]))


def bias_penalty(batch: QuantileBatch, cfg: ObjectiveConfig) -> float:
    """
    lambda_bias * max(0, b_h* - b_max)
    """
    if cfg.lambda_bias == 0.0:
        return 0.0
    return cfg.lambda_bias * max(0.0, scheduled_bias(batch, cfg) - cfg.b_max_mw)


def bias_penalty_gradient(batch: QuantileBatch, cfg: ObjectiveConfig) -> np.ndarray:
    gradient = np.zeros_like(batch.predictions)
    if cfg.lambda_bias == 0.0 or scheduled_bias(batch, cfg) - cfg.b_max_mw <= 0.0:
        return gradient
    col = batch.lead_index(cfg.h_star)
    level = batch.level_index(cfg.point_level)
    gradient[:, col, level] = cfg.lambda_bias / batch.predictions.shape[0]
    return gradient


def _opr_logits(batch: QuantileBatch, cfg: ObjectiveConfig):
    col = batch.lead_index(cfg.h_star)
    level = batch.level_index(cfg.point_level)
    z = (batch.predictions[:, col, level] - batch.actuals[:, col]) / cfg.tau_mw
    return z, col, level


def smooth_opr(batch: QuantileBatch, cfg: ObjectiveConfig) -> float:
    """
    Sigmoid-smoothed over-prediction rate at h_star, as a fraction
    """
    z, _, _ = _opr_logits(batch, cfg)
    return float(np.mean(expit(z)))


def opr_penalty(batch: QuantileBatch, cfg: ObjectiveConfig) -> float:
    """
    lambda_opr * max(0, smooth_opr - pi_max)
    """
    if cfg.lambda_opr == 0.0:
        return 0.0
    return cfg.lambda_opr * max(0.0, smooth_opr(batch, cfg) - cfg.pi_max)


def opr_penalty_gradient(batch: QuantileBatch, cfg: ObjectiveConfig) -> np.ndarray:
    gradient = np.zeros_like(batch.predictions)
    if cfg.lambda_opr == 0.0:
        return gradient
    z, col, level = _opr_logits(batch, cfg)
    sig = expit(z)
    if np.mean(sig) - cfg.pi_max <= 0.0:
        return gradient
    gradient[:, col, level] = cfg.lambda_opr * sig * (1.0 - sig) / (cfg.tau_mw * z.size)
    return gradient


def combined_objective(batch: QuantileBatch, cfg: ObjectiveConfig) -> ObjectiveValue:
    """
    Multi-quantile pinball plus bias hinge plus smoothed-OPR hinge

    Returns:
        ObjectiveValue: Loss and summed analytic gradient
    """
    value = multi_quantile_loss(batch, cfg)
    if cfg.lambda_bias > 0.0:
        value = value + ObjectiveValue(bias_penalty(batch, cfg), bias_penalty_gradient(batch, cfg))
    if cfg.lambda_opr > 0.0:
        value = value + ObjectiveValue(opr_penalty(batch, cfg), opr_penalty_gradient(batch, cfg))
    return value


def gaussian_nll(y, mu, sigma2):
    """
    Gaussian negative log-likelihood without the constant: 0.5 [ln s2 + (y - mu)^2 / s2]
    """
    sigma2 = np.asarray(sigma2, dtype=float)
    if (sigma2 <= 0).any():
        raise NonPositiveVariance("Variance must be strictly positive", {"min_sigma2": float(np.min(sigma2))})
    resid = np.asarray(y, dtype=float) - np.asarray(mu, dtype=float)
    loss = 0.5 * (np.log(sigma2) + resid * resid / sigma2)
    return float(loss) if np.ndim(loss) == 0 else loss


def gaussian_nll_gradient(y, mu, sigma2):
    """
    Partial derivatives of gaussian_nll with respect to (mu, sigma2)
    """
    sigma2 = np.asarray(sigma2, dtype=float)
    if (sigma2 <= 0).any():
        raise NonPositiveVariance("Variance must be strictly positive", {"min_sigma2": float(np.min(sigma2))})
    resid = np.asarray(y, dtype=float) - np.asarray(mu, dtype=float)
    d_mu = -resid / sigma2
    d_sigma2 = 0.5 * (1.0 / sigma2 - resid * resid / (sigma2 * sigma2))
    return d_mu, d_sigma2
