"""
RiskReport: the metric bundle for one model/variant
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.data.forecast_set import QuantileForecastSet
from src.metrics.risk import bias_at_horizon, direction_rates, large_error_counts, mape, reserve_from_errors
from src.utils.errors import ConfigError, DataError, EmptySet

logger = logging.getLogger(__name__)

MODES = ("walkforward", "fixed_split")


def _percentile_tag(p: float) -> str:
    return f"{p:g}".replace(".", "")


@dataclass(frozen=True)
class ReportSettings:
    """
    Scoring choices for a RiskReport

    Attributes:
        percentile_p: reserve percentile
        h_star: lead hour for bias (and for fixed-split scoring)
        thresholds: large-error thresholds in MW
        per_lead: leads reported as separate MAPE columns
        reserve_leads: 'all' pools every lead in walk-forward mode; 'h_star'
            scores only h_star
    """
    percentile_p: float = 99.5
    h_star: int = 24
    thresholds: Tuple[float, ...] = (1000.0, 1500.0, 2000.0)
    per_lead: Tuple[int, ...] = (1, 6, 12, 24)
    reserve_leads: str = "all"

    def __post_init__(self):
        if self.reserve_leads not in ("all", "h_star"):
            raise ConfigError("reserve_leads must be 'all' or 'h_star'", {"value": self.reserve_leads})
        if not 0.0 <= self.percentile_p <= 100.0:
            raise ConfigError("percentile_p must lie in [0, 100]", {"value": self.percentile_p})

    def scoring_leads(self, mode: str, available: Sequence[int]) -> Optional[List[int]]:
        """
        Lead subset scored in a mode; None means all available leads
        """
        if mode not in MODES:
            raise ConfigError(f"Unknown report mode: {mode}", {"allowed": list(MODES)})
        if mode == "fixed_split" or self.reserve_leads == "h_star":
            return [self.h_star]
        return None


@dataclass(frozen=True)
class RiskReport:
    """
    Risk metrics for one forecast set
    """
    mape_pct: float
    upr_pct: float
    opr_pct: float
    tie_pct: float
    bias_mw: float
    reserve_mw: float
    reserve_pct: float
    n_points: int
    large_error_counts: Dict[float, int] = field(default_factory=dict)
    h_star: int = 24
    percentile_p: float = 99.5

    def __post_init__(self):
        total = self.upr_pct + self.opr_pct + self.tie_pct
        if abs(total - 100.0) > 1e-9:
            raise DataError("UPR + OPR + tie must equal 100", {"sum": total})
        if self.reserve_mw < 0 or self.reserve_pct < 0:
            raise DataError("Reserve values must be non-negative",
                            {"reserve_mw": self.reserve_mw, "reserve_pct": self.reserve_pct})

    def to_dict(self) -> dict:
        """
        Serialize with the loss-ablation table column names
        """
        tag = _percentile_tag(self.percentile_p)
        return {
            "mape_pct": self.mape_pct,
            "upr_pct": self.upr_pct,
            f"reserve_p{tag}_pct": self.reserve_pct,
            f"bias_{self.h_star}h_mw": self.bias_mw,
            "opr_pct": self.opr_pct,
            f"reserve_p{tag}_mw": self.reserve_mw,
            "tie_pct": self.tie_pct,
            "n_points": self.n_points,
            "large_error_counts": {f"{k:g}": v for k, v in sorted(self.large_error_counts.items())},
        }


def compute_risk_report(fs: QuantileForecastSet, settings: Optional[ReportSettings] = None,
                        mode: str = "walkforward") -> RiskReport:
    """
    Score a forecast set

    Args:
        fs (QuantileForecastSet): Forecasts with actuals
        settings (ReportSettings, optional): Scoring choices
        mode (str): 'walkforward' (all leads) or 'fixed_split' (h_star only)

    Returns:
        RiskReport: Metric bundle
    """
    settings = settings or ReportSettings()
    leads = settings.scoring_leads(mode, fs.lead_hours)
    actual, point = fs.scored(leads)
    upr, opr, tie = direction_rates(actual, point)
    report = RiskReport(
        mape_pct=mape(actual, point),
        upr_pct=upr,
        opr_pct=opr,
        tie_pct=tie,
        bias_mw=bias_at_horizon(fs, settings.h_star),
        reserve_mw=reserve_from_errors(actual, point, settings.percentile_p, "mw"),
        reserve_pct=reserve_from_errors(actual, point, settings.percentile_p, "pct"),
        n_points=int(actual.size),
        large_error_counts=large_error_counts(fs, settings.thresholds, leads),
        h_star=settings.h_star,
        percentile_p=settings.percentile_p,
    )
    logger.debug(f"Scored {report.n_points} points: MAPE {report.mape_pct:.3f}%")
    return report


def per_lead_mape(fs: QuantileForecastSet, leads: Sequence[int]) -> Dict[str, float]:
    """
    MAPE at individual lead hours (leads absent from the set are skipped)
    """
    result = {}
    for lead in leads:
        if lead in fs.lead_hours:
            actual, point = fs.scored([lead])
            result[str(lead)] = mape(actual, point)
    return result


def fold_mape_summary(fs: QuantileForecastSet) -> Optional[Dict[str, float]]:
    """
    Mean and (population) std of per-fold MAPE over all leads

    Returns:
        dict or None: {mean, std, n_folds}, None when the set has no fold ids
    """
    if fs.fold_ids is None:
        return None
    values = []
    for fold in np.unique(fs.fold_ids):
        rows = fs.fold_ids == fold
        actual = fs.actuals[rows].ravel()
        if actual.size == 0:
            continue
        values.append(mape(actual, fs.point()[rows].ravel()))
    if not values:
        raise EmptySet("No folds with scored points")
    return {"mean": float(np.mean(values)), "std": float(np.std(values)), "n_folds": len(values)}
