"""
Grid-specific forecast risk metrics

All functions are pure and operate on MW arrays or QuantileForecastSet
instances. Point forecasts are the set's scheduled (median) level.
"""
import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from src.data.forecast_set import QuantileForecastSet
from src.utils.errors import ConfigError, EmptySet, LengthMismatch, NonPositiveActual, NonPositiveForecast

logger = logging.getLogger(__name__)

RESERVE_BASES = ("mw", "pct")


def _pair(actual, forecast) -> Tuple[np.ndarray, np.ndarray]:
    actual = np.asarray(actual, dtype=float).ravel()
    forecast = np.asarray(forecast, dtype=float).ravel()
    if actual.shape != forecast.shape:
        raise LengthMismatch("Actual and forecast lengths differ",
                             {"actual": actual.size, "forecast": forecast.size})
    if actual.size == 0:
        raise EmptySet("Nothing to score")
    return actual, forecast


def mape(actual, forecast) -> float:
    """
    Mean absolute percentage error

    Args:
        actual: Observed load (MW), all strictly positive
        forecast: Point forecasts (MW)

    Returns:
        float: (100/n) * sum(|y - yhat| / y)
    """
    actual, forecast = _pair(actual, forecast)
    if (actual <= 0).any():
        raise NonPositiveActual("MAPE needs strictly positive actuals",
                                {"min_actual": float(actual.min())})
    return float(100.0 * np.mean(np.abs(actual - forecast) / actual))


def direction_rates(actual, forecast) -> Tuple[float, float, float]:
    """
    Under-prediction, over-prediction and tie rates in percent

    Returns:
        tuple: (upr_pct, opr_pct, tie_pct); strict inequalities, ties separate
    """
    actual, forecast = _pair(actual, forecast)
    n = actual.size
    under = int(np.count_nonzero(actual > forecast))
    over = int(np.count_nonzero(forecast > actual))
    ties = n - under - over
    return 100.0 * under / n, 100.0 * over / n, 100.0 * ties / n


def bias_at_horizon(fs: QuantileForecastSet, h_star: int) -> float:
    """
    Mean scheduled-minus-actual at one lead hour (positive = over-forecast)
    """
    col = fs.lead_index(h_star)
    if len(fs) == 0:
        raise EmptySet("Bias needs at least one issue time")
    return float(np.mean(fs.point()[:, col] - fs.actuals[:, col]))


def percentile(values, p: float) -> float:
    """
    Percentile by linear interpolation between order statistics at index (n-1)*p/100

    Args:
        values: Non-empty real vector
        p (float): Percent in [0, 100]

    Returns:
        float: Interpolated percentile
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise EmptySet("Percentile of an empty set")
    if not 0.0 <= p <= 100.0:
        raise ConfigError("Percentile must lie in [0, 100]", {"p": p})
    return float(np.percentile(values, p, method="linear"))


def reserve_from_errors(actual, forecast, percentile_p: float = 99.5, basis: str = "mw") -> float:
    """
    Upward reserve covering percentile_p of under-forecast errors

    basis='mw' uses max(0, y - yhat); basis='pct' uses 100 * max(0, (y - yhat)/yhat).
    """
    if basis not in RESERVE_BASES:
        raise ConfigError(f"Unknown reserve basis: {basis}", {"allowed": list(RESERVE_BASES)})
    actual, forecast = _pair(actual, forecast)
    if basis == "mw":
        return percentile(np.maximum(0.0, actual - forecast), percentile_p)
    if (forecast <= 0).any():
        raise NonPositiveForecast("Percentage reserve needs strictly positive forecasts",
                                  {"min_forecast": float(forecast.min())})
    return 100.0 * percentile(np.maximum(0.0, (actual - forecast) / forecast), percentile_p)


def reserve(fs: QuantileForecastSet, percentile_p: float = 99.5, basis: str = "mw",
            leads: Optional[Sequence[int]] = None) -> float:
    """
    Reserve requirement over all scored (issue, lead) points of a forecast set

    Args:
        fs (QuantileForecastSet): Forecasts with actuals
        percentile_p (float): Coverage percentile
        basis (str): 'mw' or 'pct'
        leads (sequence, optional): Lead subset (default: all leads)

    Returns:
        float: Reserve in MW or percent of the point forecast
    """
    actual, point = fs.scored(leads)
    return reserve_from_errors(actual, point, percentile_p, basis)


def large_error_counts(fs: QuantileForecastSet, thresholds: Sequence[float],
                       leads: Optional[Sequence[int]] = None) -> Dict[float, int]:
    """
    Count points whose absolute point-forecast error exceeds each threshold (MW)
    """
    actual, point = fs.scored(leads)
    errors = np.abs(actual - point)
    counts = {}
    for threshold in thresholds:
        if threshold <= 0:
            raise ConfigError("Large-error thresholds must be positive", {"threshold": threshold})
        counts[float(threshold)] = int(np.count_nonzero(errors > threshold))
    return counts
