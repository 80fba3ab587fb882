"""
Walk-forward and fixed-split execution
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from src.backtest.schedule import Fold, ScheduleParams, WalkForwardSchedule, make_fixed_split
from src.data.align import AlignedFrame
from src.data.forecast_set import QuantileForecastSet
from src.data.series import TimeRange
from src.features.builder import FeatureBuilder
from src.forecast.forecaster import FoldContext, Forecaster
from src.utils.errors import EmptySet, FoldError

logger = logging.getLogger(__name__)


@dataclass
class FoldOutcome:
    index: int
    status: str
    n_issue_times: int
    n_skipped: int
    forecasts: Optional[QuantileForecastSet] = None
    checkpoint: Dict[str, Any] = field(default_factory=dict)

    def summary(self) -> Dict[str, Any]:
        return {"fold": self.index, "status": self.status,
                "n_issue_times": self.n_issue_times, "n_skipped": self.n_skipped}


@dataclass
class BacktestResult:
    """
    Concatenated forecasts plus per-fold bookkeeping
    """
    forecasts: QuantileForecastSet
    folds: List[FoldOutcome]
    schedule: WalkForwardSchedule

    def fold_summaries(self) -> List[Dict[str, Any]]:
        return [f.summary() for f in self.folds]


def _run_fold(frame: AlignedFrame, fold: Fold, params: ScheduleParams, builder: FeatureBuilder,
              make_forecaster: Callable[[], Forecaster]) -> FoldOutcome:
    issues = builder.valid_issue_times(frame, fold.eval_issue_times)
    skipped = len(fold.eval_issue_times) - len(issues)
    if skipped:
        logger.warning(f"Fold {fold.index}: skipped {skipped} issue times with gaps")
    if len(issues) == 0:
        logger.warning(f"Fold {fold.index}: no valid issue times; recorded as empty")
        return FoldOutcome(fold.index, "empty", 0, skipped)

    # fitting never sees rows after the cutoff
    history = frame.restrict(TimeRange(frame.timestamps[0], fold.cutoff))
    fit_context = FoldContext(history, builder, fold.train_range,
                              builder.valid_issue_times(history, fold.train_issue_times(params)),
                              builder.valid_issue_times(history, fold.validation_issue_times(params)),
                              fold.index)
    forecaster = make_forecaster()
    forecaster.fit(fit_context)
    predict_context = replace(fit_context, frame=frame)
    forecasts = forecaster.predict(predict_context, issues)
    forecasts = replace(forecasts, fold_ids=np.full(len(forecasts), fold.index))
    logger.info(f"Fold {fold.index}: fitted {forecaster.name} on {len(fit_context.train_issues)} issue times, "
                f"scored {len(issues)}")
    return FoldOutcome(fold.index, "ok", len(issues), skipped, forecasts, forecaster.to_checkpoint())


def run_backtest(frame: AlignedFrame, schedule: WalkForwardSchedule, builder: FeatureBuilder,
                 make_forecaster: Callable[[], Forecaster]) -> BacktestResult:
    """
    Fit a fresh forecaster per fold and concatenate the out-of-sample forecasts

    Args:
        frame (AlignedFrame): Full aligned data
        schedule (WalkForwardSchedule): Folds shared by every model
        builder (FeatureBuilder): Feature construction (also decides issue-time validity)
        make_forecaster (callable): Returns an unfitted forecaster

    Returns:
        BacktestResult: Forecasts in issue-time order and per-fold outcomes

    Raises:
        FoldError: If fitting or predicting a fold fails
        EmptySet: If no fold produced a forecast
    """
    params = schedule.params

    def run(fold: Fold) -> FoldOutcome:
        try:
            return _run_fold(frame, fold, params, builder, make_forecaster)
        except FoldError:
            raise
        except Exception as e:
            raise FoldError(fold.index, e) from e

    if params.n_jobs > 1 and len(schedule.folds) > 1:
        with ThreadPoolExecutor(max_workers=params.n_jobs) as pool:
            outcomes = list(pool.map(run, schedule.folds))
    else:
        outcomes = [run(fold) for fold in schedule.folds]

    produced = [o.forecasts for o in outcomes if o.forecasts is not None]
    if not produced:
        raise EmptySet("No fold produced forecasts", {"folds": len(outcomes)})
    forecasts = QuantileForecastSet.concat(produced)
    logger.info(f"Backtest finished: {len(forecasts)} issue times over {len(produced)} folds")
    return BacktestResult(forecasts, outcomes, schedule)


def run_fixed_split(frame: AlignedFrame, builder: FeatureBuilder, make_forecaster: Callable[[], Forecaster],
                    params: ScheduleParams = ScheduleParams(),
                    data_range: Optional[TimeRange] = None) -> BacktestResult:
    """
    70/10/20 split over the frame (or a sub-range) run as a single fold
    """
    schedule = make_fixed_split(data_range or frame.span, params)
    return run_backtest(frame, schedule, builder, make_forecaster)
