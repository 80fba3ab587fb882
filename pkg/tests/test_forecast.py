"""
Training loop, linear quantile and Gaussian models, seasonal naive and checkpoints
"""
import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from src.data.align import align
from src.data.series import TimeRange
from src.features.builder import FeatureBuilder, FeatureMatrix, FeatureSettings
from src.forecast.forecaster import FoldContext, ForecasterFactory
from src.forecast.gaussian_linear import GaussianLinearModel, fit_gaussian_model
from src.forecast.linear_quantile import LinearQuantileModel, fit_quantile_model, predict_quantiles
from src.forecast.seasonal_naive import seasonal_naive
from src.forecast.training import TrainingOptions, cosine_step, subgradient_descent
from src.objectives.config import ObjectiveConfig
from src.utils.errors import (ColumnMismatch, ConfigError, DegenerateDesign, DivergedLoss, InsufficientHistory)
from tests.helpers import START, hours, make_series


def single_lead(values, targets, columns=None):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    n = len(targets)
    columns = columns or tuple(f"x{j}" for j in range(values.shape[1]))
    return FeatureMatrix(hours(n), np.array([1]), columns, values.reshape(n, 1, -1),
                         np.asarray(targets, dtype=float).reshape(n, 1))


def intercept_only(targets):
    n = len(targets)
    return FeatureMatrix(hours(n), np.array([1]), (), np.zeros((n, 1, 0)),
                         np.asarray(targets, dtype=float).reshape(n, 1))


def unconstrained(quantiles, weights=None):
    return ObjectiveConfig(quantiles=quantiles, weights=weights or (1.0,) * len(quantiles), h_star=1,
                           lambda_bias=0.0, lambda_opr=0.0)


class TestTraining:
    def test_cosine_schedule(self):
        assert cosine_step(0.1, 0, 10) == pytest.approx(0.1)
        assert cosine_step(0.1, 5, 10) == pytest.approx(0.05)

    def test_minimizes_quadratic(self):
        def objective(params, index):
            diff = params["x"] - 3.0
            return float(diff @ diff), {"x": 2.0 * diff}

        best, trace = subgradient_descent({"x": np.zeros(2)}, objective, 10,
                                          TrainingOptions(learning_rate=0.25, epochs=50, batch_size=10), {}, 0)
        np.testing.assert_allclose(best["x"], 3.0, atol=1e-3)
        assert trace.train_loss[0] == pytest.approx(18.0)
        assert min(trace.train_loss) < 1e-6

    def test_validation_selected_params_improve_training_loss(self, rng):
        x, x_val = rng.normal(size=200), rng.normal(size=50)
        y, y_val = 2.0 * x + 0.3 * rng.normal(size=200), 2.0 * x_val + 0.3 * rng.normal(size=50)

        def objective(params, index):
            residual = params["w"][0] * x[index] - y[index]
            return float(np.mean(residual ** 2)), {"w": np.array([2.0 * np.mean(residual * x[index])])}

        def validation(params):
            return float(np.mean((params["w"][0] * x_val - y_val) ** 2))

        options = TrainingOptions(learning_rate=0.1, epochs=30, batch_size=20, patience=30)
        best, trace = subgradient_descent({"w": np.zeros(1)}, objective, 200, options, {}, 3, validation)
        everything = np.arange(200)
        assert objective(best, everything)[0] <= objective({"w": np.zeros(1)}, everything)[0]
        assert validation(best) == pytest.approx(min(trace.validation_loss))
        assert len(trace.validation_loss) == len(trace.train_loss)
        assert trace.best_epoch > 0
        assert best["w"][0] == pytest.approx(2.0, abs=0.2)

    def test_keeps_initial_params_when_validation_never_improves(self):
        def objective(params, index):
            diff = params["x"] - 3.0
            return float(diff @ diff), {"x": 2.0 * diff}

        best, trace = subgradient_descent({"x": np.zeros(1)}, objective, 4,
                                          TrainingOptions(learning_rate=0.25, epochs=20, patience=5), {}, 0,
                                          lambda params: float(params["x"] @ params["x"]))
        np.testing.assert_array_equal(best["x"], [0.0])
        assert trace.best_epoch == 0
        assert trace.stopped_epoch == 5

    def test_divergence_aborts(self):
        def objective(params, index):
            return float(params["x"][0] ** 2), {"x": -np.ones(1)}

        with pytest.raises(DivergedLoss):
            subgradient_descent({"x": np.ones(1)}, objective, 4,
                                TrainingOptions(learning_rate=5.0, epochs=20), {}, 0)

    def test_invalid_options(self):
        with pytest.raises(ConfigError):
            TrainingOptions(epochs=0)


class TestLinearQuantile:
    def test_intercepts_recover_empirical_quantiles(self):
        rng = np.random.default_rng(7)
        targets = rng.normal(1000.0, 100.0, 10000)
        cfg = unconstrained((0.025, 0.5, 0.975), (4.0, 1.0, 4.0))
        model = fit_quantile_model(intercept_only(targets), cfg, TrainingOptions(epochs=20, batch_size=512))
        sigma = np.std(targets)
        np.testing.assert_allclose(model.intercepts, np.quantile(targets, cfg.levels), atol=0.02 * sigma)

    def test_recovers_linear_median(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=2000)
        targets = 1000.0 + 50.0 * x + rng.normal(0.0, 10.0, 2000)
        model = fit_quantile_model(single_lead(x, targets), unconstrained((0.1, 0.5, 0.9)),
                                   TrainingOptions(epochs=100, batch_size=128), seed=3)
        assert model.weights[0, 1] == pytest.approx(50.0, abs=2.5)
        forecasts = predict_quantiles(model, single_lead(x, targets))
        assert (np.diff(forecasts.predictions, axis=2) >= 0).all()
        covered = np.mean(targets <= forecasts.level(0.9)[:, 0])
        assert 0.85 < covered < 0.95

    def test_high_quantile_inflates_and_bias_hinge_corrects_it(self):
        rng = np.random.default_rng(5)
        targets = rng.normal(1000.0, 100.0, 4000)
        sigma = np.std(targets)
        options = TrainingOptions(learning_rate=0.05, epochs=300, batch_size=4000, patience=300)

        inflated = fit_quantile_model(intercept_only(targets), unconstrained((0.9,)), options)
        bias = inflated.intercepts[0] - targets.mean()
        assert bias == pytest.approx(np.quantile(targets, 0.9) - targets.mean(), abs=0.02 * sigma)
        assert bias > 1.0 * sigma

        hinged = ObjectiveConfig(quantiles=(0.9,), weights=(1.0,), h_star=1, b_max_mw=0.0,
                                 lambda_bias=2.0, lambda_opr=0.0)
        corrected = fit_quantile_model(intercept_only(targets), hinged, options)
        assert abs(corrected.intercepts[0] - targets.mean()) <= 1e-2 * sigma

    def test_constant_column_rejected(self):
        with pytest.raises(DegenerateDesign):
            fit_quantile_model(single_lead(np.ones(50), np.arange(50.0)), unconstrained((0.5,)))

    def test_too_few_rows(self):
        with pytest.raises(DegenerateDesign):
            fit_quantile_model(single_lead(np.eye(3), [1.0, 2.0, 3.0]), unconstrained((0.5,)))

    def test_column_mismatch(self):
        model = LinearQuantileModel((0.5,), ("a",), np.zeros((1, 1)), np.zeros(1))
        with pytest.raises(ColumnMismatch):
            predict_quantiles(model, single_lead([1.0, 2.0], [1.0, 2.0], ("b",)))

    def test_dict_layout(self):
        model = LinearQuantileModel((0.1, 0.9), ("a", "b"), np.array([[1.0, 2.0], [3.0, 4.0]]),
                                    np.array([5.0, 6.0]))
        payload = model.to_dict()
        assert payload["weights"] == [[1.0, 3.0], [2.0, 4.0]]
        restored = LinearQuantileModel.from_dict(json.loads(json.dumps(payload)))
        np.testing.assert_array_equal(restored.weights, model.weights)


class TestGaussianLinear:
    def test_fits_mean_and_spread(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=2000)
        targets = 1000.0 + 50.0 * x + rng.normal(0.0, 10.0, 2000)
        features = single_lead(x, targets)
        model = fit_gaussian_model(features, (0.025, 0.5, 0.975),
                                   TrainingOptions(learning_rate=0.02, epochs=400, batch_size=128, patience=400))
        mean, variance = model.moments(features)
        assert np.mean(np.abs(mean[:, 0] - (1000.0 + 50.0 * x))) < 5.0
        assert 5.0 < np.sqrt(np.median(variance)) < 20.0
        forecasts = model.predict(features)
        assert forecasts.point_level == 0.5
        assert (forecasts.level(0.975) > forecasts.level(0.5)).all()

    def test_round_trip_dict(self):
        model = GaussianLinearModel((0.5,), ("a",), np.array([0.5]), 0.1, np.array([0.2]), -0.3, 100.0, 10.0)
        restored = GaussianLinearModel.from_dict(json.loads(json.dumps(model.to_dict())))
        features = single_lead([1.0, 2.0], [0.0, 0.0], ("a",))
        np.testing.assert_allclose(restored.moments(features)[0], model.moments(features)[0])


class TestSeasonalNaive:
    def test_weekly_copy(self):
        history = make_series(np.arange(400.0))
        issue = START + pd.Timedelta(hours=300)
        np.testing.assert_array_equal(seasonal_naive(history, issue, 24), np.arange(301.0, 325.0) - 168)

    def test_short_history(self):
        history = make_series(np.arange(100.0))
        with pytest.raises(InsufficientHistory):
            seasonal_naive(history, START + pd.Timedelta(hours=99), 24)

    def test_horizon_beyond_season(self):
        with pytest.raises(InsufficientHistory):
            seasonal_naive(make_series(np.arange(400.0)), START + pd.Timedelta(hours=399), 200)


class TestForecasters:
    @pytest.fixture(scope="class")
    def context(self, duck_dataset):
        frame = align([duck_dataset.load_series(), duck_dataset.weather_series("temperature")])
        settings = FeatureSettings(horizon_hours=24, context_hours=168, weather=("temperature",))
        builder = FeatureBuilder.for_frame(frame, settings)
        train_range = TimeRange(frame.timestamps[0], frame.timestamps[0] + pd.Timedelta(days=60))
        train = pd.date_range(frame.timestamps[0] + pd.Timedelta(days=8), periods=40, freq="24h")
        validation = pd.date_range(train[-1] + pd.Timedelta(days=1), periods=5, freq="24h")
        return FoldContext(frame, builder, train_range, builder.valid_issue_times(frame, train),
                           builder.valid_issue_times(frame, validation))

    def test_unknown_name(self):
        with pytest.raises(ConfigError):
            ForecasterFactory().get_forecaster("lstm", ObjectiveConfig())

    @pytest.mark.parametrize("name", ForecasterFactory.names)
    def test_fit_predict_checkpoint(self, context, name, tmp_path):
        forecaster = ForecasterFactory().get_forecaster(name, ObjectiveConfig(), {"epochs": 5}, seed=1)
        issues = pd.date_range(context.train_range.end + pd.Timedelta(hours=1), periods=3, freq="24h")
        forecasts = forecaster.fit(context).predict(context, issues)
        assert forecasts.predictions.shape[:2] == (3, 24)
        assert np.isfinite(forecasts.predictions).all()
        path = forecaster.save(str(tmp_path / f"{name}.json"), "abc123")
        checkpoint = json.loads(Path(path).read_text())
        assert checkpoint["model"] == name
        assert checkpoint["config_hash"] == "abc123"
        if name != "seasonal_naive":
            assert checkpoint["quantiles"] == [0.025, 0.5, 0.975]
            assert context.builder.load_column in checkpoint["normalizer"]["mean"]

    def test_training_is_deterministic(self, context):
        def fit():
            forecaster = ForecasterFactory().get_forecaster("linear_quantile", ObjectiveConfig(), {"epochs": 5}, 9)
            return forecaster.fit(context).parameters()

        assert fit() == fit()

    def test_predict_before_fit(self, context):
        forecaster = ForecasterFactory().get_forecaster("linear_quantile", ObjectiveConfig())
        with pytest.raises(ConfigError):
            forecaster.predict(context, context.validation_issues)
