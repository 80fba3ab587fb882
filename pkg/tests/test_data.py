"""
Hourly series, alignment, normalization and forecast-set containers
"""
import numpy as np
import pandas as pd
import pytest

from src.data.align import GapPolicy, align
from src.data.forecast_set import QuantileForecastSet, point_level_for, validate_levels
from src.data.normalize import fit_normalizer
from src.data.series import ChannelKind, HourlySeries, TimeRange
from src.utils.errors import (ConfigError, ConstantChannel, DataError, EmptySeries, EmptySet, GapInWindow,
                              InvalidLevel, NoOverlap, QuantileCrossing, ShapeMismatch)
from tests.helpers import START, hours, interval_set, make_series, point_set


class TestHourlySeries:
    def test_contiguous_series_has_no_gaps(self):
        series = make_series([1.0, 2.0, 3.0])
        assert len(series) == 3
        assert len(series.gap_report()) == 0

    def test_missing_hour_is_reported(self):
        series = make_series([1.0, 2.0, 3.0], drop=[1])
        assert len(series) == 2
        gaps = series.gap_report()
        assert list(gaps) == [START + pd.Timedelta(hours=1)]

    def test_naive_timestamps_are_utc(self):
        series = HourlySeries("A:load", ChannelKind.LOAD, pd.date_range("2024-01-01", periods=2, freq="h"), [1, 2])
        assert str(series.timestamps.tz) == "UTC"

    def test_off_grid_timestamp_rejected(self):
        with pytest.raises(DataError):
            HourlySeries("A:load", ChannelKind.LOAD, [START, START + pd.Timedelta(minutes=30)], [1.0, 2.0])

    def test_unsorted_timestamps_rejected(self):
        with pytest.raises(DataError):
            HourlySeries("A:load", ChannelKind.LOAD, [START + pd.Timedelta(hours=1), START], [1.0, 2.0])

    def test_non_finite_values_rejected(self):
        with pytest.raises(DataError):
            make_series([1.0, np.nan])

    def test_empty_series_rejected(self):
        with pytest.raises(EmptySeries):
            HourlySeries("A:load", ChannelKind.LOAD, pd.DatetimeIndex([], tz="UTC"), [])

    def test_values_are_read_only(self):
        series = make_series([1.0, 2.0])
        with pytest.raises(ValueError):
            series.values[0] = 5.0

    def test_time_range_is_closed(self):
        span = TimeRange(START, START + pd.Timedelta(hours=5))
        assert span.hours == 6
        assert span.contains([START, START + pd.Timedelta(hours=5)]).all()
        with pytest.raises(DataError):
            TimeRange(START, START - pd.Timedelta(hours=1))


class TestAlign:
    def test_identical_grids_fully_present(self):
        a = make_series(np.arange(10), "A:load")
        b = make_series(np.arange(10) * 2, "A:temperature", ChannelKind.TEMPERATURE)
        frame = align([a, b])
        assert len(frame.timestamps) == 10
        assert frame.mask["A:load"].all() and frame.mask["A:temperature"].all()

    def test_intersection_grid(self):
        a = make_series(np.arange(10), "A:load")
        b = make_series(np.arange(10), "B:load", start=START + pd.Timedelta(hours=5))
        frame = align([a, b], GapPolicy(grid="intersection"))
        expected = hours(5, START + pd.Timedelta(hours=5))
        assert frame.timestamps.equals(expected)

    def test_union_grid_marks_absent_cells(self):
        a = make_series(np.arange(10), "A:load")
        b = make_series(np.arange(10), "B:load", start=START + pd.Timedelta(hours=5))
        frame = align([a, b])
        assert len(frame.timestamps) == 15
        assert frame.mask["A:load"].sum() == 10
        assert not frame.mask["A:load"][10:].any()
        assert np.isnan(frame.columns["A:load"][10:]).all()

    def test_disjoint_intersection_raises(self):
        a = make_series(np.arange(5), "A:load")
        b = make_series(np.arange(5), "B:load", start=START + pd.Timedelta(hours=10))
        with pytest.raises(NoOverlap):
            align([a, b], GapPolicy(grid="intersection"))

    def test_forward_fill_bridges_short_gap_only(self):
        values = np.arange(20, dtype=float)
        series = make_series(values, drop=[3, 4, 10, 11, 12, 13, 14])
        frame = align([series], GapPolicy(fill="ffill", limit=3))
        column, present = frame.columns["A:load"], frame.mask["A:load"]
        assert present[3] and present[4]
        assert column[3] == 2.0 and column[4] == 2.0
        assert not present[10:15].any()

    def test_drop_never_invents_values(self):
        series = make_series(np.arange(6), drop=[2])
        frame = align([series])
        assert not frame.mask["A:load"][2]

    def test_duplicate_ids_rejected(self):
        with pytest.raises(DataError):
            align([make_series([1, 2]), make_series([3, 4])])

    def test_bad_policy_rejected(self):
        with pytest.raises(ConfigError):
            GapPolicy(grid="outer")

    def test_value_of_absent_cell_raises(self):
        frame = align([make_series(np.arange(6), drop=[2])])
        assert frame.value("A:load", START + pd.Timedelta(hours=1)) == 1.0
        with pytest.raises(GapInWindow):
            frame.value("A:load", START + pd.Timedelta(hours=2))
        assert not frame.window_complete("A:load", START, START + pd.Timedelta(hours=3))
        assert frame.window_complete("A:load", START + pd.Timedelta(hours=3), START + pd.Timedelta(hours=5))

    def test_restrict_copies_rows(self):
        frame = align([make_series(np.arange(10))])
        head = frame.restrict(TimeRange(START, START + pd.Timedelta(hours=3)))
        assert len(head.timestamps) == 4
        assert head.columns["A:load"].tolist() == [0.0, 1.0, 2.0, 3.0]


class TestNormalizer:
    def test_population_std(self):
        frame = align([make_series([1.0, 3.0, 100.0])])
        state = fit_normalizer(frame, TimeRange(START, START + pd.Timedelta(hours=1)))
        assert state.mean["A:load"] == pytest.approx(2.0)
        assert state.std["A:load"] == pytest.approx(1.0)
        assert float(state.apply(3.0, "A:load")) == pytest.approx(1.0)

    def test_round_trip(self, rng):
        frame = align([make_series(rng.normal(500, 50, 200))])
        state = fit_normalizer(frame, frame.span)
        x = rng.normal(0, 1000, 50)
        np.testing.assert_allclose(state.invert(state.apply(x, "A:load"), "A:load"), x, atol=1e-10)

    def test_values_after_range_do_not_change_state(self, rng):
        values = rng.normal(500, 50, 100)
        train = TimeRange(START, START + pd.Timedelta(hours=59))
        before = fit_normalizer(align([make_series(values)]), train)
        values[60:] += 1e6
        after = fit_normalizer(align([make_series(values)]), train)
        assert before.mean == after.mean and before.std == after.std

    def test_constant_channel_rejected(self):
        frame = align([make_series(np.full(10, 7.0))])
        with pytest.raises(ConstantChannel):
            fit_normalizer(frame, frame.span)

    def test_range_without_rows_rejected(self):
        frame = align([make_series(np.arange(10))])
        later = TimeRange(START + pd.Timedelta(days=5), START + pd.Timedelta(days=6))
        with pytest.raises(EmptySeries):
            fit_normalizer(frame, later)


class TestForecastSet:
    def test_levels_must_increase(self):
        with pytest.raises(InvalidLevel):
            validate_levels([0.5, 0.1])
        with pytest.raises(InvalidLevel):
            validate_levels([0.0, 0.5])

    def test_point_level_prefers_median(self):
        assert point_level_for([0.025, 0.5, 0.975]) == 0.5
        assert point_level_for([0.9]) == 0.9
        assert point_level_for([0.1, 0.6, 0.9]) == 0.6

    def test_crossing_rejected(self):
        predictions = np.array([[[10.0, 9.0]]])
        with pytest.raises(QuantileCrossing):
            QuantileForecastSet(hours(1), [1], [0.5, 0.9], predictions, [[10.0]])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeMismatch):
            QuantileForecastSet(hours(2), [1], [0.5], np.zeros((1, 1, 1)), np.zeros((1, 1)))

    def test_scored_flattens_requested_leads(self):
        actual = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        fs = point_set(actual, actual + 1)
        y, yhat = fs.scored([2])
        assert y.tolist() == [2.0, 5.0]
        assert yhat.tolist() == [3.0, 6.0]

    def test_concat_orders_by_issue_time(self):
        late = point_set([3.0], [3.0], start=START + pd.Timedelta(hours=5))
        early = point_set([1.0, 2.0], [1.0, 2.0])
        joined = QuantileForecastSet.concat([late, early])
        assert joined.actuals[:, 0].tolist() == [1.0, 2.0, 3.0]

    def test_concat_of_nothing_raises(self):
        with pytest.raises(EmptySet):
            QuantileForecastSet.concat([])

    def test_frame_round_trip_keeps_folds(self):
        actual = np.arange(6, dtype=float).reshape(3, 2) + 100
        fs = interval_set(actual, actual + 2, 10.0)
        fs = QuantileForecastSet(fs.issue_times, fs.lead_hours, fs.quantile_levels, fs.predictions, fs.actuals,
                                 fold_ids=np.array([0, 0, 1]))
        back = QuantileForecastSet.from_frame(fs.to_frame())
        np.testing.assert_allclose(back.predictions, fs.predictions)
        assert back.fold_ids.tolist() == [0, 0, 1]
        assert back.issue_times.equals(fs.issue_times)
