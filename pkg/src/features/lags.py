"""
Thermal-lag determination by lagged Pearson correlation
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Tuple

import numpy as np
import pandas as pd

from src.data.series import HOUR, HourlySeries
from src.utils.errors import ConfigError, ConstantSeries, InsufficientOverlap

logger = logging.getLogger(__name__)

MIN_OVERLAP_HOURS = 48


@dataclass(frozen=True)
class LagEntry:
    """
    Lag scan result for one covariate

    Attributes:
        covariate: channel name (e.g. 'temperature')
        lag_hours: tau*, the first lag maximizing |r|
        pearson_r: r at tau*
        curve: r(0), ..., r(max_lag)
    """
    covariate: str
    lag_hours: int
    pearson_r: float
    curve: Tuple[float, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lag_hours": int(self.lag_hours),
            "pearson_r": round(float(self.pearson_r), 6),
            "curve": [round(float(r), 6) for r in self.curve],
        }


@dataclass(frozen=True)
class LagProfile:
    entries: Dict[str, LagEntry] = field(default_factory=dict)

    def lag_for(self, covariate: str, default: int = 0) -> int:
        entry = self.entries.get(covariate)
        return default if entry is None else entry.lag_hours

    def to_dict(self) -> Dict[str, Any]:
        return {name: entry.to_dict() for name, entry in sorted(self.entries.items())}

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "LagProfile":
        entries = {}
        for name, values in raw.items():
            curve = tuple(float(r) for r in values.get("curve", []))
            entries[name] = LagEntry(name, int(values["lag_hours"]), float(values.get("pearson_r", 0.0)), curve)
        return cls(entries)

    @classmethod
    def fixed(cls, lags: Dict[str, int]) -> "LagProfile":
        """
        Profile with prescribed lags and no scan curve
        """
        return cls({name: LagEntry(name, int(lag), float("nan"), ()) for name, lag in lags.items()})


def lag_scan(covariate: HourlySeries, load: HourlySeries, max_lag: int = 12,
             min_overlap: int = MIN_OVERLAP_HOURS) -> LagEntry:
    """
    Scan r(tau) = Corr(w_{t - tau}, L_t) for tau = 0..max_lag

    Args:
        covariate (HourlySeries): Weather series w
        load (HourlySeries): Load series L
        max_lag (int): Largest lag in hours
        min_overlap (int): Minimum overlapping hours at every lag

    Returns:
        LagEntry: Curve and optimal lag (first index on ties)

    Raises:
        ConstantSeries: If either series is constant on an overlap
        InsufficientOverlap: If a lag leaves fewer than min_overlap hours
    """
    if max_lag < 0:
        raise ConfigError("max_lag must be non-negative", {"max_lag": max_lag})
    weather = covariate.to_series()
    target = load.to_series()
    curve = []
    for tau in range(max_lag + 1):
        # index moves forward by tau, so the value at t is w_{t - tau}
        shifted = pd.Series(weather.to_numpy(), index=weather.index + tau * HOUR)
        pair = pd.concat({"w": shifted, "y": target}, axis=1, join="inner").dropna()
        if len(pair) < min_overlap:
            raise InsufficientOverlap(f"Only {len(pair)} overlapping hours at lag {tau}",
                                      {"covariate": covariate.id, "lag": tau, "minimum": min_overlap})
        w = pair["w"].to_numpy()
        y = pair["y"].to_numpy()
        if np.std(w) == 0.0 or np.std(y) == 0.0:
            raise ConstantSeries("Cannot correlate a constant series",
                                 {"covariate": covariate.id, "load": load.id, "lag": tau})
        curve.append(float(np.corrcoef(w, y)[0, 1]))

    curve = np.asarray(curve)
    best = int(np.argmax(np.abs(curve)))
    name = covariate.channel_kind.value
    logger.debug(f"{covariate.id}: tau*={best} h, r={curve[best]:.4f}")
    return LagEntry(name, best, float(curve[best]), tuple(curve.tolist()))


def scan_profile(covariates: Iterable[HourlySeries], load: HourlySeries, max_lag: int = 12) -> LagProfile:
    """
    Lag scan over several covariates, keyed by channel kind
    """
    entries = {}
    for series in covariates:
        entry = lag_scan(series, load, max_lag)
        entries[entry.covariate] = entry
        logger.info(f"Lag for {entry.covariate}: {entry.lag_hours} h (r={entry.pearson_r:.3f})")
    return LagProfile(entries)
