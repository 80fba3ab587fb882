"""
Market-derived cost asymmetry and the quantile levels it implies
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from src.data.forecast_set import QuantileForecastSet
from src.data.series import HourlySeries
from src.utils.errors import DegenerateSpread, KappaBelowOne, NegativeRho, NoOverlap

logger = logging.getLogger(__name__)

DEFAULT_MIN_EVENT_HOURS = 100


@dataclass(frozen=True)
class SpreadParts:
    """
    Positive and negative parts of the hourly RT - DA spread
    """
    timestamps: pd.DatetimeIndex
    s_plus: np.ndarray
    s_minus: np.ndarray

    @property
    def spread(self) -> np.ndarray:
        return self.s_plus - self.s_minus

    def __len__(self) -> int:
        return len(self.timestamps)


def _joined(left: HourlySeries, right: HourlySeries) -> pd.DataFrame:
    frame = pd.concat({"left": left.to_series(), "right": right.to_series()}, axis=1, join="inner")
    return frame.dropna()


def spread_decompose(lmp_da: HourlySeries, lmp_rt: HourlySeries) -> SpreadParts:
    """
    Split s_t = rt_t - da_t into s+ = max(0, s) and s- = max(0, -s)

    Hours where either price is missing are dropped.

    Raises:
        NoOverlap: If the two series share no hour
    """
    joined = _joined(lmp_da, lmp_rt)
    if joined.empty:
        raise NoOverlap("DA and RT prices share no hour", {"da": lmp_da.id, "rt": lmp_rt.id})
    spread = joined["right"].to_numpy() - joined["left"].to_numpy()
    logger.debug(f"Spread over {len(spread)} hours ({lmp_da.id} vs {lmp_rt.id})")
    return SpreadParts(joined.index, np.maximum(0.0, spread), np.maximum(0.0, -spread))


def rho_price(s_plus, s_minus) -> float:
    """
    Price-only asymmetry ratio E[s+] / E[s-]

    Raises:
        DegenerateSpread: If E[s-] is zero (ratio undefined)
    """
    s_plus = np.asarray(s_plus, dtype=float)
    s_minus = np.asarray(s_minus, dtype=float)
    denominator = float(np.mean(s_minus)) if s_minus.size else 0.0
    if not denominator > 0.0:
        raise DegenerateSpread("Mean negative spread is zero; rho_price is undefined",
                               {"hours": int(s_minus.size)})
    return float(np.mean(s_plus)) / denominator


def rho_event_from_arrays(s_plus, s_minus, delta, min_count: int = DEFAULT_MIN_EVENT_HOURS) -> Optional[float]:
    """
    Event-conditioned ratio E[s+ | delta > 0] / E[s- | delta < 0]

    Returns:
        float or None: None when a side has fewer than min_count hours or C_over is zero
    """
    s_plus, s_minus, delta = (np.asarray(a, dtype=float) for a in (s_plus, s_minus, delta))
    under = delta > 0
    over = delta < 0
    if under.sum() < max(min_count, 1) or over.sum() < max(min_count, 1):
        logger.info(f"rho_event unavailable: {int(under.sum())} under / {int(over.sum())} over hours "
                    f"(minimum {min_count})")
        return None
    c_over = float(np.mean(s_minus[over]))
    if c_over == 0.0:
        return None
    return float(np.mean(s_plus[under])) / c_over


def rho_event(parts: SpreadParts, actual_load: HourlySeries, da_forecast: HourlySeries,
              min_count: int = DEFAULT_MIN_EVENT_HOURS) -> Optional[float]:
    """
    Settlement-style asymmetry ratio conditioned on the sign of the DA load error

    Args:
        parts (SpreadParts): Decomposed spreads
        actual_load (HourlySeries): Realized load
        da_forecast (HourlySeries): Day-ahead load forecast
        min_count (int): Minimum hours per side

    Returns:
        float or None: rho_event, or None when unstable
    """
    delta = _joined(da_forecast, actual_load)
    spreads = pd.DataFrame({"s_plus": parts.s_plus, "s_minus": parts.s_minus}, index=parts.timestamps)
    frame = spreads.join((delta["right"] - delta["left"]).rename("delta"), how="inner")
    if frame.empty:
        return None
    return rho_event_from_arrays(frame["s_plus"], frame["s_minus"], frame["delta"], min_count)


def q_star(rho: float) -> float:
    """
    Bayes-optimal quantile rho / (1 + rho)
    """
    if rho < 0:
        raise NegativeRho("Asymmetry ratio must be non-negative", {"rho": rho})
    return rho / (1.0 + rho)


def q_target(rho_price_value: float, kappa: float = 1.0) -> float:
    """
    Operational target level max(0.5, q*(kappa * rho_price))
    """
    if kappa < 1.0:
        raise KappaBelowOne("Reliability premium kappa must be >= 1", {"kappa": kappa})
    return max(0.5, q_star(kappa * rho_price_value))


@dataclass(frozen=True)
class AsymmetryEstimate:
    node: str
    hours: int
    rho_price: float
    q_price_star: float
    kappa: float
    rho_op: float
    q_target: float
    rho_event: Optional[float] = None
    q_event_star: Optional[float] = None

    def to_dict(self, digits: int = 4) -> Dict[str, Any]:
        def rounded(value):
            return None if value is None else round(float(value), digits)

        return {
            "node": self.node,
            "hours": int(self.hours),
            "rho_price": rounded(self.rho_price),
            "q_price_star": rounded(self.q_price_star),
            "rho_event": rounded(self.rho_event),
            "q_event_star": rounded(self.q_event_star),
            "kappa": rounded(self.kappa),
            "rho_op": rounded(self.rho_op),
            "q_target": rounded(self.q_target),
        }


def estimate_asymmetry(node: str, lmp_da: HourlySeries, lmp_rt: HourlySeries, kappa: float = 1.0,
                       actual_load: Optional[HourlySeries] = None,
                       da_forecast: Optional[HourlySeries] = None,
                       min_event_hours: int = DEFAULT_MIN_EVENT_HOURS) -> AsymmetryEstimate:
    """
    Full asymmetry estimate for one pricing node

    rho_event is computed only when both the realized load and the DA load
    forecast are supplied.

    Returns:
        AsymmetryEstimate: Ratios, implied levels and the hour count
    """
    if kappa < 1.0:
        raise KappaBelowOne("Reliability premium kappa must be >= 1", {"kappa": kappa})
    parts = spread_decompose(lmp_da, lmp_rt)
    price_ratio = rho_price(parts.s_plus, parts.s_minus)
    event_ratio = None
    if actual_load is not None and da_forecast is not None:
        event_ratio = rho_event(parts, actual_load, da_forecast, min_event_hours)
    estimate = AsymmetryEstimate(
        node=node,
        hours=len(parts),
        rho_price=price_ratio,
        q_price_star=q_star(price_ratio),
        kappa=float(kappa),
        rho_op=kappa * price_ratio,
        q_target=q_target(price_ratio, kappa),
        rho_event=event_ratio,
        q_event_star=None if event_ratio is None else q_star(event_ratio),
    )
    logger.info(f"{node}: rho_price={price_ratio:.4f} over {len(parts)} hours, q_target={estimate.q_target:.3f}")
    return estimate


def scheduled_level(fs: QuantileForecastSet, target: float) -> float:
    """
    Forecast level used as the operational schedule for a target quantile

    Picks the available level closest to the target; ties go to the higher
    (more conservative) level.
    """
    levels = fs.quantile_levels
    distance = np.abs(levels - target)
    candidates = np.flatnonzero(np.isclose(distance, distance.min(), rtol=0.0, atol=1e-12))
    return float(levels[candidates[-1]])
