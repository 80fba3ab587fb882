"""
Weekly seasonal-naive baseline: y_hat_{t+h} = y_{t+h-168}
"""
import logging
from typing import Any, Dict

import numpy as np
import pandas as pd

from src.data.align import AlignedFrame
from src.data.forecast_set import QuantileForecastSet
from src.data.series import HourlySeries, to_utc, to_utc_index
from src.forecast.forecaster import FoldContext, Forecaster
from src.utils.errors import InsufficientHistory

logger = logging.getLogger(__name__)

SEASON_HOURS = 168


def seasonal_naive(history: HourlySeries, issue_time, horizon: int = 48) -> np.ndarray:
    """
    Point forecasts for leads 1..horizon from the same hour one week earlier

    Args:
        history (HourlySeries): Load observed up to the issue time
        issue_time: Issue time t
        horizon (int): Number of leads H

    Returns:
        np.ndarray: Forecasts for t+1..t+H

    Raises:
        InsufficientHistory: If an hour t+h-168 is missing
    """
    t = to_utc(issue_time)
    if horizon > SEASON_HOURS:
        raise InsufficientHistory("Horizon longer than one season needs unobserved hours",
                                  {"horizon": horizon})
    series = history.to_series()
    wanted = t + pd.to_timedelta(np.arange(1, horizon + 1) - SEASON_HOURS, unit="h")
    values = series.reindex(wanted)
    if values.isna().any():
        raise InsufficientHistory("History does not cover the seasonal lags",
                                  {"issue_time": t.isoformat(), "missing": int(values.isna().sum())})
    return values.to_numpy()


def _frame_lookup(frame: AlignedFrame, column: str, positions: np.ndarray) -> np.ndarray:
    n = len(frame.timestamps)
    inside = (positions >= 0) & (positions < n)
    clipped = np.clip(positions, 0, n - 1)
    present = inside & frame.mask[column][clipped]
    return np.where(present, np.asarray(frame.columns[column])[clipped], np.nan)


class SeasonalNaiveForecaster(Forecaster):
    """
    Baseline with a single 0.5 level; nothing to fit
    """

    name = "seasonal_naive"

    def fit(self, context: FoldContext) -> "SeasonalNaiveForecaster":
        return self

    def predict(self, context: FoldContext, issue_times) -> QuantileForecastSet:
        frame = context.frame
        column = context.builder.load_column
        issue_times = to_utc_index(issue_times)
        leads = context.builder.settings.lead_hours
        positions = np.array([frame.position(t) for t in issue_times], dtype=int)
        target_index = positions[:, None] + leads[None, :]
        forecasts = _frame_lookup(frame, column, target_index - SEASON_HOURS)
        actuals = _frame_lookup(frame, column, target_index)
        if np.isnan(forecasts).any() or (positions < 0).any():
            raise InsufficientHistory("History does not cover the seasonal lags",
                                      {"model": self.name, "missing": int(np.isnan(forecasts).sum())})
        return QuantileForecastSet(issue_times, leads, np.array([0.5]), forecasts[:, :, None], actuals, 0.5)

    def parameters(self) -> Dict[str, Any]:
        return {"quantiles": [0.5], "columns": [], "weights": [], "intercepts": [],
                "season_hours": SEASON_HOURS}
