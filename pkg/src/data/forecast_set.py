"""
Quantile forecast containers shared by metrics, objectives and forecasters
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.data.series import to_utc_index
from src.utils.errors import EmptySet, InvalidLevel, MissingLead, QuantileCrossing, ShapeMismatch

logger = logging.getLogger(__name__)


def validate_levels(levels: Sequence[float]) -> np.ndarray:
    """
    Check quantile levels are strictly increasing inside (0, 1)

    Returns:
        np.ndarray: Levels as a float array
    """
    levels = np.asarray(levels, dtype=float)
    if levels.ndim != 1 or levels.size == 0:
        raise InvalidLevel("At least one quantile level is required")
    if not ((levels > 0.0) & (levels < 1.0)).all():
        raise InvalidLevel("Quantile levels must lie strictly inside (0, 1)", {"levels": levels.tolist()})
    if levels.size > 1 and not (np.diff(levels) > 0).all():
        raise InvalidLevel("Quantile levels must be strictly increasing", {"levels": levels.tolist()})
    return levels


def point_level_for(levels: Sequence[float]) -> float:
    """
    Scheduled (point) level: 0.5 when present, else the level closest to 0.5
    """
    levels = np.asarray(levels, dtype=float)
    return float(levels[int(np.argmin(np.abs(levels - 0.5)))])


def level_column(level: float) -> str:
    return f"q{level:g}"


@dataclass(frozen=True)
class QuantileBatch:
    """
    Raw prediction tensor for objective evaluation (crossing allowed)

    Attributes:
        predictions: [issue x lead x level] in MW
        actuals: [issue x lead] in MW
        quantile_levels: levels aligned with the last prediction axis
        lead_hours: lead (hours ahead) for each lead position
    """
    predictions: np.ndarray
    actuals: np.ndarray
    quantile_levels: np.ndarray
    lead_hours: np.ndarray

    def __post_init__(self):
        predictions = np.asarray(self.predictions, dtype=float)
        actuals = np.asarray(self.actuals, dtype=float)
        levels = validate_levels(self.quantile_levels)
        leads = np.asarray(self.lead_hours, dtype=int)
        if predictions.ndim != 3 or actuals.ndim != 2:
            raise ShapeMismatch("Predictions must be 3-D and actuals 2-D",
                                {"predictions": predictions.shape, "actuals": actuals.shape})
        if predictions.shape[:2] != actuals.shape or predictions.shape[2] != levels.size \
                or leads.shape != (actuals.shape[1],):
            raise ShapeMismatch("Prediction tensor does not match actuals, levels and leads",
                                {"predictions": predictions.shape, "actuals": actuals.shape,
                                 "levels": levels.size, "leads": leads.size})
        object.__setattr__(self, "predictions", predictions)
        object.__setattr__(self, "actuals", actuals)
        object.__setattr__(self, "quantile_levels", levels)
        object.__setattr__(self, "lead_hours", leads)

    def lead_index(self, lead: int) -> int:
        hits = np.flatnonzero(self.lead_hours == lead)
        if hits.size == 0:
            raise MissingLead(f"Lead {lead} h is not in the forecast", {"lead": lead})
        return int(hits[0])

    def level_index(self, level: float) -> int:
        hits = np.flatnonzero(np.isclose(self.quantile_levels, level, rtol=0.0, atol=1e-12))
        if hits.size == 0:
            raise InvalidLevel(f"Level {level} is not in the forecast", {"level": level})
        return int(hits[0])

    @property
    def point_level(self) -> float:
        return point_level_for(self.quantile_levels)


@dataclass(frozen=True)
class QuantileForecastSet:
    """
    Per issue time and lead hour predicted quantiles plus the actuals they are scored against

    Attributes:
        issue_times: Forecast origins (last observed hour)
        lead_hours: Lead hours 1..H
        quantile_levels: Strictly increasing levels containing the point level
        predictions: [issue x lead x level] in MW, non-decreasing across levels
        actuals: [issue x lead] in MW
        point_level: Level treated as the scheduled forecast (0.5 by default)
        fold_ids: Optional walk-forward fold index per issue time
    """
    issue_times: pd.DatetimeIndex
    lead_hours: np.ndarray
    quantile_levels: np.ndarray
    predictions: np.ndarray
    actuals: np.ndarray
    point_level: float = 0.5
    fold_ids: Optional[np.ndarray] = None

    def __post_init__(self):
        batch = QuantileBatch(self.predictions, self.actuals, self.quantile_levels, self.lead_hours)
        issue_times = to_utc_index(self.issue_times)
        if len(issue_times) != batch.actuals.shape[0]:
            raise ShapeMismatch("One issue time per prediction row is required",
                                {"issue_times": len(issue_times), "rows": batch.actuals.shape[0]})
        if batch.lead_hours.size > 1 and not (np.diff(batch.lead_hours) > 0).all():
            raise ShapeMismatch("Lead hours must be strictly increasing")
        batch.level_index(self.point_level)
        if batch.quantile_levels.size > 1 and (np.diff(batch.predictions, axis=2) < 0).any():
            raise QuantileCrossing("Predicted quantiles decrease across levels")
        fold_ids = None
        if self.fold_ids is not None:
            fold_ids = np.asarray(self.fold_ids, dtype=int)
            if fold_ids.shape != (len(issue_times),):
                raise ShapeMismatch("fold_ids must have one entry per issue time")
        object.__setattr__(self, "issue_times", issue_times)
        object.__setattr__(self, "lead_hours", batch.lead_hours)
        object.__setattr__(self, "quantile_levels", batch.quantile_levels)
        object.__setattr__(self, "predictions", batch.predictions)
        object.__setattr__(self, "actuals", batch.actuals)
        object.__setattr__(self, "point_level", float(self.point_level))
        object.__setattr__(self, "fold_ids", fold_ids)

    def __len__(self) -> int:
        return len(self.issue_times)

    def as_batch(self) -> QuantileBatch:
        return QuantileBatch(self.predictions, self.actuals, self.quantile_levels, self.lead_hours)

    def lead_index(self, lead: int) -> int:
        return self.as_batch().lead_index(lead)

    def point(self) -> np.ndarray:
        """
        Scheduled forecast [issue x lead]
        """
        return self.predictions[:, :, self.as_batch().level_index(self.point_level)]

    def level(self, level: float) -> np.ndarray:
        return self.predictions[:, :, self.as_batch().level_index(level)]

    def scored(self, leads: Optional[Sequence[int]] = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Flatten (actual, point forecast) pairs over issue times and a lead subset

        Args:
            leads (sequence, optional): Lead hours to score (default: all)

        Returns:
            tuple: (actuals, point forecasts) as 1-D arrays

        Raises:
            EmptySet: If nothing is left to score
            MissingLead: If a requested lead is absent
        """
        if leads is None:
            cols = np.arange(self.lead_hours.size)
        else:
            cols = np.array([self.lead_index(int(h)) for h in leads], dtype=int)
        actual = self.actuals[:, cols].ravel()
        point = self.point()[:, cols].ravel()
        if actual.size == 0:
            raise EmptySet("No (issue, lead) points to score")
        return actual, point

    @classmethod
    def concat(cls, sets: List["QuantileForecastSet"]) -> "QuantileForecastSet":
        """
        Concatenate sets sharing leads and levels, ordered by issue time
        """
        sets = [s for s in sets if len(s) > 0]
        if not sets:
            raise EmptySet("No forecast sets to concatenate")
        head = sets[0]
        for other in sets[1:]:
            if not (np.array_equal(other.lead_hours, head.lead_hours)
                    and np.allclose(other.quantile_levels, head.quantile_levels)):
                raise ShapeMismatch("Forecast sets disagree on leads or levels")
        issue_times = pd.DatetimeIndex(np.concatenate([s.issue_times.asi8 for s in sets])).tz_localize("UTC")
        order = np.argsort(issue_times.asi8, kind="stable")
        fold_ids = None
        if all(s.fold_ids is not None for s in sets):
            fold_ids = np.concatenate([s.fold_ids for s in sets])[order]
        return cls(
            issue_times[order],
            head.lead_hours,
            head.quantile_levels,
            np.concatenate([s.predictions for s in sets])[order],
            np.concatenate([s.actuals for s in sets])[order],
            head.point_level,
            fold_ids,
        )

    def to_frame(self) -> pd.DataFrame:
        """
        Long-format table: one row per (issue time, lead)
        """
        n_issue, n_lead = self.actuals.shape
        frame = pd.DataFrame({
            "issue_time": np.repeat(self.issue_times.strftime("%Y-%m-%dT%H:%M:%SZ"), n_lead),
            "lead": np.tile(self.lead_hours, n_issue),
            "fold": np.repeat(self.fold_ids, n_lead) if self.fold_ids is not None else -1,
            "actual": self.actuals.ravel(),
        })
        for k, level in enumerate(self.quantile_levels):
            frame[level_column(level)] = self.predictions[:, :, k].ravel()
        return frame

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, point_level: float = 0.5) -> "QuantileForecastSet":
        """
        Inverse of ``to_frame``
        """
        level_cols = [c for c in frame.columns if c.startswith("q")]
        levels = sorted(float(c[1:]) for c in level_cols)
        frame = frame.sort_values(["issue_time", "lead"], kind="stable")
        issue_times = pd.DatetimeIndex(pd.to_datetime(frame["issue_time"].unique(), utc=True))
        leads = np.sort(frame["lead"].unique()).astype(int)
        n_issue, n_lead = len(issue_times), len(leads)
        if len(frame) != n_issue * n_lead:
            raise ShapeMismatch("Forecast table is not a complete issue x lead grid",
                                {"rows": len(frame), "issues": n_issue, "leads": n_lead})
        predictions = np.stack(
            [frame[level_column(level)].to_numpy(dtype=float).reshape(n_issue, n_lead) for level in levels],
            axis=2,
        )
        folds = frame["fold"].to_numpy(dtype=int).reshape(n_issue, n_lead)[:, 0] if "fold" in frame else None
        if folds is not None and (folds < 0).all():
            folds = None
        return cls(issue_times, leads, np.array(levels), predictions,
                   frame["actual"].to_numpy(dtype=float).reshape(n_issue, n_lead),
                   point_level, folds)
