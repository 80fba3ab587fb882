"""
Builders for hourly series and forecast sets used across the tests
"""
import numpy as np
import pandas as pd

from src.data.forecast_set import QuantileForecastSet
from src.data.series import ChannelKind, HourlySeries

START = pd.Timestamp("2024-01-01T00:00:00Z")


def hours(n, start=START):
    return pd.date_range(start, periods=n, freq="h")


def make_series(values, series_id="A:load", kind=ChannelKind.LOAD, start=START, drop=()):
    """
    Hourly series from consecutive values, with some positions left out
    """
    values = np.asarray(values, dtype=float)
    index = hours(len(values), start)
    keep = np.ones(len(values), dtype=bool)
    keep[list(drop)] = False
    return HourlySeries(series_id, kind, index[keep], values[keep])


def point_set(actual, point, lead_hours=None, start=START):
    """
    Median-only forecast set; 1-D inputs become a single-lead set
    """
    actual = np.asarray(actual, dtype=float)
    point = np.asarray(point, dtype=float)
    if actual.ndim == 1:
        actual = actual[:, None]
        point = point[:, None]
    n, h = actual.shape
    leads = np.arange(1, h + 1) if lead_hours is None else np.asarray(lead_hours)
    return QuantileForecastSet(hours(n, start), leads, np.array([0.5]), point[:, :, None], actual)


def interval_set(actual, point, half_width, lead_hours=None, start=START):
    """
    Three-level forecast set with a symmetric band around the point forecast
    """
    fs = point_set(actual, point, lead_hours, start)
    median = fs.predictions[:, :, 0]
    predictions = np.stack([median - half_width, median, median + half_width], axis=2)
    return QuantileForecastSet(fs.issue_times, fs.lead_hours, np.array([0.025, 0.5, 0.975]),
                               predictions, fs.actuals)


