"""
Diebold-Mariano test for equal predictive accuracy
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from src.utils.errors import ConfigError, DataError, DegenerateDifferential, LengthMismatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DMResult:
    statistic: float
    p_value: float
    n_obs: int
    horizon: int
    mean_differential: float

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "n_obs": self.n_obs,
            "h": self.horizon,
            "mean_differential": self.mean_differential,
        }


def newey_west_variance(x: np.ndarray, bandwidth: int) -> float:
    """
    Newey-West HAC long-run variance with Bartlett weights 1 - j/(bandwidth+1)

    Args:
        x (np.ndarray): Series (demeaned internally)
        bandwidth (int): Number of autocovariance lags

    Returns:
        float: Non-negative variance estimate
    """
    n = x.size
    centered = x - np.mean(x)
    variance = float(np.dot(centered, centered) / n)
    for j in range(1, min(bandwidth, n - 1) + 1):
        gamma_j = float(np.dot(centered[j:], centered[:-j]) / n)
        variance += 2.0 * (1.0 - j / (bandwidth + 1)) * gamma_j
    return max(variance, 0.0)


def dm_test(errors_a, errors_b, h: int) -> DMResult:
    """
    Diebold-Mariano test on squared-error loss differentials

    d_t = e_a^2 - e_b^2; statistic = mean(d) / sqrt(V/n) with the Newey-West
    variance at bandwidth h-1; two-sided normal p-value. A negative statistic
    means forecast A has the lower loss.

    Args:
        errors_a: Forecast errors of model A
        errors_b: Forecast errors of model B, same length and order
        h (int): Forecast horizon in steps

    Returns:
        DMResult: statistic, p-value and sample details

    Raises:
        ConfigError: If h < 1 or n <= h
        DegenerateDifferential: If d is constant and non-zero
    """
    a = np.asarray(errors_a, dtype=float).ravel()
    b = np.asarray(errors_b, dtype=float).ravel()
    if a.shape != b.shape:
        raise LengthMismatch("Error series differ in length", {"a": a.size, "b": b.size})
    if h < 1:
        raise ConfigError("Horizon must be at least 1", {"h": h})
    n = a.size
    if n <= h:
        raise ConfigError("DM test needs more observations than the horizon", {"n": n, "h": h})
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise DataError("Error series must be finite")

    d = a * a - b * b
    mean_d = float(np.mean(d))
    variance = newey_west_variance(d, h - 1)
    scale = float(np.mean(d * d))

    if scale == 0.0 or variance <= 1e-24 * scale:
        if scale == 0.0 or abs(mean_d) <= 1e-12 * np.sqrt(scale):
            logger.debug("DM test: identical losses, returning statistic 0")
            return DMResult(0.0, 1.0, n, h, mean_d)
        raise DegenerateDifferential("Loss differential is constant and non-zero",
                                     {"mean_differential": mean_d, "n": n})

    statistic = mean_d / np.sqrt(variance / n)
    p_value = float(2.0 * norm.sf(abs(statistic)))
    return DMResult(float(statistic), p_value, n, h, mean_d)
