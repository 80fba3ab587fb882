"""
Walk-forward schedule and fold execution
"""
import numpy as np
import pandas as pd
import pytest

from src.backtest.runner import run_backtest, run_fixed_split
from src.backtest.schedule import ScheduleParams, make_fixed_split, make_schedule
from src.data.align import align
from src.data.series import HOUR, TimeRange
from src.features.builder import FeatureBuilder, FeatureSettings
from src.forecast.forecaster import ForecasterFactory
from src.metrics.risk import mape
from src.objectives.config import ObjectiveConfig
from src.utils.errors import ConfigError, DataError, FoldError, InsufficientData
from tests.helpers import START, make_series

DAY = pd.Timedelta(days=1)


def days_range(days, extra_hours=-1):
    return TimeRange(START, START + days * DAY + extra_hours * HOUR)


def enumerate_issue_times(data_range, params):
    """
    Brute-force walk over every hour of the range
    """
    first = data_range.start + params.initial_train_days * DAY
    horizon = params.horizon_hours * HOUR
    refit = params.refit_days * DAY
    stride = params.stride_hours * HOUR
    issues = []
    t = first
    while t + horizon <= data_range.end:
        block = (t - first) // refit
        offset = (t - first) - block * refit
        if offset % stride == pd.Timedelta(0):
            issues.append((int(block), t))
        t += HOUR
    return issues


class TestSchedule:
    def test_two_years_against_enumeration(self):
        data_range = days_range(730)
        schedule = make_schedule(data_range)
        expected = enumerate_issue_times(data_range, schedule.params)
        got = [(f.index, t) for f in schedule.folds for t in f.eval_issue_times]
        assert got == expected
        assert len(schedule) == 7
        assert schedule.n_issue_times == 548

    def test_cutoffs_and_windows(self):
        schedule = make_schedule(days_range(730))
        for k, fold in enumerate(schedule.folds):
            assert fold.cutoff == START + (180 + 90 * k) * DAY - HOUR
            assert fold.train_range.start == START
            assert fold.validation_range.end == fold.cutoff
            assert fold.validation_range.hours == 30 * 24
            assert fold.eval_issue_times[0] == fold.cutoff + HOUR
        issues = schedule.all_issue_times()
        assert issues.is_monotonic_increasing and issues.is_unique

    def test_drop_partial_final_block(self):
        schedule = make_schedule(days_range(730), ScheduleParams(drop_partial_final=True))
        assert len(schedule) == 6
        assert schedule.n_issue_times == 540

    def test_minimal_range_has_one_issue(self):
        schedule = make_schedule(days_range(180, extra_hours=48))
        assert len(schedule) == 1
        assert list(schedule.folds[0].eval_issue_times) == [START + 180 * DAY]

    def test_one_hour_short(self):
        # the only candidate issue time would forecast one hour past the data
        with pytest.raises(InsufficientData) as info:
            make_schedule(days_range(180, extra_hours=47))
        assert info.value.context["available_hours"] == 180 * 24 + 48
        assert info.value.context["needed_hours"] == 180 * 24 + 48 + 1

    def test_training_issues_end_before_validation(self):
        params = ScheduleParams()
        fold = make_schedule(days_range(400), params).folds[0]
        train = fold.train_issue_times(params)
        validation = fold.validation_issue_times(params)
        assert train[-1] + params.horizon < fold.validation_range.start
        assert validation[0] == fold.validation_range.start
        assert validation[-1] + params.horizon <= fold.cutoff

    def test_hash_ignores_concurrency(self):
        a = make_schedule(days_range(400), ScheduleParams(n_jobs=1))
        b = make_schedule(days_range(400), ScheduleParams(n_jobs=4))
        c = make_schedule(days_range(400), ScheduleParams(stride_hours=12))
        assert a.schedule_hash() == b.schedule_hash()
        assert a.schedule_hash() != c.schedule_hash()

    def test_invalid_params(self):
        with pytest.raises(ConfigError):
            ScheduleParams(stride_hours=0)
        with pytest.raises(ConfigError):
            ScheduleParams(initial_train_days=30, val_days=30)

    def test_fixed_split(self):
        schedule = make_fixed_split(days_range(100))
        [fold] = schedule.folds
        assert fold.cutoff == START + 1919 * HOUR
        assert fold.validation_range.hours == 240
        assert len(fold.eval_issue_times) == 18
        assert fold.eval_issue_times[0] == START + 1920 * HOUR

    def test_fixed_split_fractions(self):
        with pytest.raises(ConfigError):
            make_fixed_split(days_range(100), train_fraction=0.9, val_fraction=0.1)


SMALL = ScheduleParams(initial_train_days=21, refit_days=7, val_days=5, stride_hours=24, horizon_hours=24)


def weekly_frame(days=42):
    values = 1000.0 + 10.0 * (np.arange(days * 24) % 168)
    return align([make_series(values, "A:load")])


def naive_factory():
    return ForecasterFactory().get_forecaster("seasonal_naive", ObjectiveConfig())


class TestRunner:
    settings = FeatureSettings(timezone="UTC", context_hours=168, horizon_hours=24, weather=())

    def test_seasonal_naive_is_exact_on_weekly_data(self):
        frame = weekly_frame()
        builder = FeatureBuilder.for_frame(frame, self.settings)
        result = run_backtest(frame, make_schedule(frame.span, SMALL), builder, naive_factory)
        actual, point = result.forecasts.scored()
        assert mape(actual, point) == 0.0
        assert len(result.forecasts) == result.schedule.n_issue_times
        assert sorted(set(result.forecasts.fold_ids)) == [f.index for f in result.folds]
        assert all(f.status == "ok" for f in result.folds)

    def test_gaps_are_skipped_and_counted(self):
        values = 1000.0 + 10.0 * (np.arange(42 * 24) % 168)
        frame = align([make_series(values, "A:load", drop=[22 * 24 + 5])])
        builder = FeatureBuilder.for_frame(frame, self.settings)
        result = run_backtest(frame, make_schedule(frame.span, SMALL), builder, naive_factory)
        assert result.folds[0].n_skipped > 0
        assert len(result.forecasts) == result.schedule.n_issue_times - sum(f.n_skipped for f in result.folds)

    def test_fitting_never_sees_rows_after_cutoff(self, duck_dataset):
        full = align([duck_dataset.load_series(), duck_dataset.weather_series("temperature")])
        frame = full.restrict(TimeRange(full.timestamps[0], full.timestamps[0] + 40 * DAY - HOUR))
        settings = FeatureSettings(context_hours=168, horizon_hours=24, weather=("temperature",))
        builder = FeatureBuilder.for_frame(frame, settings)
        schedule = make_schedule(frame.span, SMALL)

        def factory():
            return ForecasterFactory().get_forecaster("linear_quantile", ObjectiveConfig(), {"epochs": 3}, seed=2)

        before = run_backtest(frame, schedule, builder, factory)
        cutoff = schedule.folds[0].cutoff
        load = np.asarray(frame.columns[builder.load_column]).copy()
        load[frame.timestamps > cutoff] += 5000.0
        after = run_backtest(frame.with_values(builder.load_column, load), schedule, builder, factory)
        assert before.folds[0].checkpoint == after.folds[0].checkpoint
        assert before.folds[1].checkpoint != after.folds[1].checkpoint

    def test_parallel_folds_match_serial(self):
        frame = weekly_frame()
        builder = FeatureBuilder.for_frame(frame, self.settings)
        serial = run_backtest(frame, make_schedule(frame.span, SMALL), builder, naive_factory)
        parallel = run_backtest(frame, make_schedule(frame.span, ScheduleParams(
            initial_train_days=21, refit_days=7, val_days=5, stride_hours=24, horizon_hours=24, n_jobs=3)),
            builder, naive_factory)
        np.testing.assert_array_equal(serial.forecasts.predictions, parallel.forecasts.predictions)
        assert list(serial.forecasts.issue_times) == list(parallel.forecasts.issue_times)

    def test_fold_failure_carries_index_and_exit_code(self):
        frame = weekly_frame()
        builder = FeatureBuilder.for_frame(frame, self.settings)

        def broken():
            raise DataError("bad fold")

        with pytest.raises(FoldError) as info:
            run_backtest(frame, make_schedule(frame.span, SMALL), builder, broken)
        assert info.value.context["fold"] == 0
        assert info.value.context["cause"] == "DataError"
        assert info.value.exit_code == DataError.exit_code

    def test_fixed_split_runs_one_fold(self):
        frame = weekly_frame(60)
        builder = FeatureBuilder.for_frame(frame, self.settings)
        result = run_fixed_split(frame, builder, naive_factory, SMALL)
        assert len(result.folds) == 1
        actual, point = result.forecasts.scored()
        assert mape(actual, point) == 0.0
