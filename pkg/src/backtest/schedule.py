"""
Rolling-origin walk-forward schedule
"""
import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Tuple

import pandas as pd

from src.data.series import HOUR, TimeRange
from src.utils.errors import ConfigError, InsufficientData
from src.utils.file_utils import canonical_json, short_hash

logger = logging.getLogger(__name__)

DAY = pd.Timedelta(days=1)


@dataclass(frozen=True)
class ScheduleParams:
    """
    Attributes:
        initial_train_days: history before the first cutoff
        refit_days: spacing of cutoffs
        val_days: validation window ending at each cutoff
        stride_hours: spacing of evaluation issue times
        horizon_hours: leads 1..H
        train_stride_hours: spacing of training/validation issue times
        drop_partial_final: drop a final block truncated by the end of data
        n_jobs: folds fitted concurrently
    """
    initial_train_days: int = 180
    refit_days: int = 90
    val_days: int = 30
    stride_hours: int = 24
    horizon_hours: int = 48
    train_stride_hours: int = 24
    drop_partial_final: bool = False
    n_jobs: int = 1

    def __post_init__(self):
        positive = ("initial_train_days", "refit_days", "val_days", "stride_hours", "horizon_hours",
                    "train_stride_hours", "n_jobs")
        bad = {name: getattr(self, name) for name in positive if getattr(self, name) < 1}
        if bad:
            raise ConfigError("Schedule parameters must be positive", bad)
        if self.val_days >= self.initial_train_days:
            raise ConfigError("Validation window must be shorter than the initial training history",
                              {"val_days": self.val_days, "initial_train_days": self.initial_train_days})

    @property
    def horizon(self) -> pd.Timedelta:
        return self.horizon_hours * HOUR


@dataclass(frozen=True)
class Fold:
    """
    One refit: data up to ``cutoff`` for fitting, issue times after it for scoring
    """
    index: int
    train_range: TimeRange
    validation_range: TimeRange
    eval_issue_times: pd.DatetimeIndex

    @property
    def cutoff(self) -> pd.Timestamp:
        return self.train_range.end

    def train_issue_times(self, params: ScheduleParams) -> pd.DatetimeIndex:
        """
        Issue times whose whole target window precedes the validation window
        """
        last = self.validation_range.start - HOUR - params.horizon
        if last < self.train_range.start:
            return pd.DatetimeIndex([], tz="UTC")
        return pd.date_range(self.train_range.start, last, freq=f"{params.train_stride_hours}h")

    def validation_issue_times(self, params: ScheduleParams) -> pd.DatetimeIndex:
        """
        Issue times inside the validation window whose targets end by the cutoff
        """
        last = self.cutoff - params.horizon
        if last < self.validation_range.start:
            return pd.DatetimeIndex([], tz="UTC")
        return pd.date_range(self.validation_range.start, last, freq=f"{params.train_stride_hours}h")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fold": self.index,
            "train_range": self.train_range.describe(),
            "validation_range": self.validation_range.describe(),
            "eval_issue_times": [t.isoformat() for t in self.eval_issue_times],
        }


@dataclass(frozen=True)
class WalkForwardSchedule:
    params: ScheduleParams
    data_range: TimeRange
    folds: Tuple[Fold, ...]

    def __len__(self) -> int:
        return len(self.folds)

    @property
    def n_issue_times(self) -> int:
        return sum(len(f.eval_issue_times) for f in self.folds)

    def all_issue_times(self) -> pd.DatetimeIndex:
        times = [t for f in self.folds for t in f.eval_issue_times]
        return pd.DatetimeIndex(times, tz="UTC") if times else pd.DatetimeIndex([], tz="UTC")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "params": asdict(self.params),
            "data_range": self.data_range.describe(),
            "folds": [f.to_dict() for f in self.folds],
        }

    def schedule_hash(self) -> str:
        payload = self.to_dict()
        # concurrency does not change the schedule
        payload["params"].pop("n_jobs")
        return short_hash(canonical_json(payload))


def make_schedule(data_range: TimeRange, params: ScheduleParams = ScheduleParams()) -> WalkForwardSchedule:
    """
    Build the fold list for a data range

    cutoff_k = start + (initial_train_days + k * refit_days) days - 1 h is the
    last training hour. Fold k scores issue times cutoff_k + 1 h + j * stride
    up to cutoff_{k+1} whose horizon ends inside the data range.

    Args:
        data_range (TimeRange): Closed range of available hours
        params (ScheduleParams): Schedule parameters

    Returns:
        WalkForwardSchedule: Deterministic folds

    Raises:
        InsufficientData: If the range cannot hold one full-horizon issue time
    """
    start, end = data_range.start, data_range.end
    first_issue = start + params.initial_train_days * DAY
    if first_issue + params.horizon > end:
        raise InsufficientData("Data range too short for one walk-forward issue time",
                               {"data_range": data_range.describe(),
                                "available_hours": data_range.hours,
                                "needed_hours": params.initial_train_days * 24 + params.horizon_hours + 1})
    folds: List[Fold] = []
    stride = f"{params.stride_hours}h"
    k = 0
    while True:
        cutoff = start + (params.initial_train_days + k * params.refit_days) * DAY - HOUR
        block_start = cutoff + HOUR
        if block_start + params.horizon > end:
            break
        next_cutoff = cutoff + params.refit_days * DAY
        last_admissible = min(next_cutoff, end - params.horizon)
        issues = pd.date_range(block_start, last_admissible, freq=stride)
        nominal = pd.date_range(block_start, next_cutoff, freq=stride)
        partial = len(issues) < len(nominal)
        if partial and params.drop_partial_final:
            logger.info(f"Dropping partial final block after {cutoff.isoformat()} ({len(issues)} issue times)")
            break
        validation = TimeRange(cutoff - params.val_days * DAY + HOUR, cutoff)
        folds.append(Fold(k, TimeRange(start, cutoff), validation, issues))
        if partial:
            break
        k += 1

    schedule = WalkForwardSchedule(params, data_range, tuple(folds))
    logger.info(f"Schedule: {len(folds)} folds, {schedule.n_issue_times} issue times over {data_range.describe()}")
    return schedule


def make_fixed_split(data_range: TimeRange, params: ScheduleParams = ScheduleParams(),
                     train_fraction: float = 0.7, val_fraction: float = 0.1) -> WalkForwardSchedule:
    """
    Single fold: first 70% train, next 10% validation, last 20% evaluation

    Raises:
        ConfigError: If the fractions leave no evaluation share
        InsufficientData: If no issue time fits the evaluation share
    """
    if not (0 < train_fraction and 0 < val_fraction and train_fraction + val_fraction < 1):
        raise ConfigError("Fixed-split fractions must be positive and sum below 1",
                          {"train": train_fraction, "validation": val_fraction})
    hours = data_range.hours
    train_hours = int(hours * train_fraction)
    val_hours = int(hours * val_fraction)
    cutoff = data_range.start + (train_hours + val_hours - 1) * HOUR
    validation = TimeRange(cutoff - (val_hours - 1) * HOUR, cutoff)
    last = data_range.end - params.horizon
    if cutoff + HOUR > last:
        raise InsufficientData("Evaluation share too short for one full horizon",
                               {"data_range": data_range.describe()})
    issues = pd.date_range(cutoff + HOUR, last, freq=f"{params.stride_hours}h")
    fold = Fold(0, TimeRange(data_range.start, cutoff), validation, issues)
    return WalkForwardSchedule(params, data_range, (fold,))
