"""
Feature construction for issue-time x lead forecasting rows
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.data.align import AlignedFrame
from src.data.normalize import NormalizerState
from src.data.series import HOUR, ChannelKind, to_utc, to_utc_index
from src.features.btm import AffineMap, btm_fuse, daylight_gate
from src.features.lags import LagProfile
from src.utils.errors import ConfigError, DataError, LeakageError

logger = logging.getLogger(__name__)

TIME_COLUMNS = ("hod_sin", "hod_cos", "dow_sin", "dow_cos")


def cyclical_encoding(hour, dow) -> np.ndarray:
    """
    (sin, cos) of hour/24 and of day-of-week/7, stacked on the last axis
    """
    hour = np.asarray(hour, dtype=float)
    dow = np.asarray(dow, dtype=float)
    return np.stack([
        np.sin(2 * np.pi * hour / 24.0),
        np.cos(2 * np.pi * hour / 24.0),
        np.sin(2 * np.pi * dow / 7.0),
        np.cos(2 * np.pi * dow / 7.0),
    ], axis=-1)


def time_features(timestamps, tz: str = "UTC") -> np.ndarray:
    """
    Sinusoidal hour-of-day and day-of-week encodings in a named timezone

    Args:
        timestamps: One instant or a sequence of instants
        tz (str): IANA timezone used for the local clock

    Returns:
        np.ndarray: Shape (4,) for one instant, (n, 4) otherwise
    """
    if np.ndim(timestamps) == 0 and not isinstance(timestamps, pd.DatetimeIndex):
        local = to_utc(timestamps).tz_convert(tz)
        return cyclical_encoding(local.hour + local.minute / 60.0, local.dayofweek)
    local = to_utc_index(timestamps).tz_convert(tz)
    return cyclical_encoding(np.asarray(local.hour + local.minute / 60.0), np.asarray(local.dayofweek))


@dataclass(frozen=True)
class BtmSettings:
    """
    Daylight-gated BTM solar column

    The contribution is d_t * (ghi_scale * GHI_t) * capacity_mw.
    """
    enabled: bool = False
    capacity_mw: float = 0.0
    ghi_scale: float = 0.001
    sunrise: float = 6.0
    sunset: float = 19.0
    ramp_hours: float = 1.0

    def maps(self) -> Tuple[AffineMap, AffineMap]:
        phi = AffineMap(np.eye(1), np.zeros(1))
        g = AffineMap(np.array([[self.ghi_scale], [0.0]]), np.zeros(2))
        return phi, g


@dataclass(frozen=True)
class FeatureSettings:
    """
    Attributes:
        timezone: local clock for time encodings and the daylight gate
        max_lag: largest lag scanned by lag_scan
        context_hours: history that must be gap-free before an issue time
        horizon_hours: leads 1..H
        load_lags: recent-load columns y_t .. y_{t-L+1}
        seasonal_lags: add same-hour previous day and previous week columns
        weather: weather channel kinds used as covariates
        future_weather: use weather at t+h-tau (assumed available forecast);
            when False the latest observed value up to t is used
        weather_noise_std: noise on future weather, in channel standard deviations
    """
    timezone: str = "America/Los_Angeles"
    max_lag: int = 12
    context_hours: int = 240
    horizon_hours: int = 48
    load_lags: int = 3
    seasonal_lags: bool = True
    weather: Tuple[str, ...] = ("temperature", "ghi", "humidity", "wind_speed")
    future_weather: bool = True
    weather_noise_std: float = 0.0
    btm: BtmSettings = field(default_factory=BtmSettings)

    def __post_init__(self):
        object.__setattr__(self, "weather", tuple(self.weather))
        if self.horizon_hours < 1 or self.load_lags < 1:
            raise ConfigError("horizon_hours and load_lags must be positive")
        if self.context_hours < max(self.load_lags, 168 if self.seasonal_lags else 0):
            raise ConfigError("context_hours must cover the load lags",
                              {"context_hours": self.context_hours, "load_lags": self.load_lags})
        if self.weather_noise_std < 0:
            raise ConfigError("weather_noise_std must be non-negative")
        for kind in self.weather:
            if kind not in {k.value for k in ChannelKind if k.is_weather}:
                raise ConfigError(f"Unknown weather channel: {kind}", {"channel": kind})

    @property
    def lead_hours(self) -> np.ndarray:
        return np.arange(1, self.horizon_hours + 1)


@dataclass(frozen=True)
class FeatureMatrix:
    """
    Feature tensor [issue x lead x column] with the load target per (issue, lead)

    Attributes:
        future_columns: columns that read values after the issue time
            (assumed-available weather forecasts)
    """
    issue_times: pd.DatetimeIndex
    lead_hours: np.ndarray
    columns: Tuple[str, ...]
    values: np.ndarray
    targets: np.ndarray
    future_columns: FrozenSet[str] = frozenset()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        shape = (len(self.issue_times), len(self.lead_hours))
        if values.shape != shape + (len(self.columns),) or targets.shape != shape:
            raise DataError("Feature tensor does not match issue times, leads and columns",
                            {"values": values.shape, "targets": targets.shape, "columns": len(self.columns)})
        object.__setattr__(self, "issue_times", to_utc_index(self.issue_times))
        object.__setattr__(self, "lead_hours", np.asarray(self.lead_hours, dtype=int))
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return len(self.issue_times)

    @property
    def n_rows(self) -> int:
        return self.targets.size

    def subset(self, index) -> "FeatureMatrix":
        return replace(self, issue_times=self.issue_times[index],
                       values=self.values[index], targets=self.targets[index])

    def column_index(self, name: str) -> int:
        return self.columns.index(name)


def lag_align(frame: AlignedFrame, profile: LagProfile, issue_time, lead: int, load_column: str,
              weather_columns: Dict[str, str], load_offsets: Sequence[int] = (0, 1, 2)) -> Dict[str, float]:
    """
    One feature row for issue time t and lead h

    Weather channel c contributes w_{(t+h) - tau*_c}; load contributes y_{t-j}
    for each offset j >= 0.

    Args:
        frame (AlignedFrame): Source data
        profile (LagProfile): Optimal lag per weather kind
        issue_time: Issue time t (last observed hour)
        lead (int): Lead hour h
        load_column (str): Load column id
        weather_columns (dict): weather kind -> column id
        load_offsets (sequence): Load history offsets j

    Returns:
        dict: column name -> value

    Raises:
        LeakageError: If a load offset reaches past the issue time
        GapInWindow: If a required cell is absent
    """
    t = to_utc(issue_time)
    if any(j < 0 for j in load_offsets):
        raise LeakageError("Load history columns may not read after the issue time",
                           {"offsets": list(load_offsets)})
    row = {}
    for kind, column in weather_columns.items():
        tau = profile.lag_for(kind)
        row[f"w_{kind}"] = frame.value(column, t + (lead - tau) * HOUR)
    for j in load_offsets:
        row[f"load_lag_{j}"] = frame.value(load_column, t - j * HOUR)
    return row


def _window_complete(cumulative: np.ndarray, first: np.ndarray, last: np.ndarray, n: int) -> np.ndarray:
    inside = (first >= 0) & (last < n)
    first_c = np.clip(first, 0, n - 1)
    last_c = np.clip(last, 0, n - 1)
    count = cumulative[last_c + 1] - cumulative[first_c]
    return inside & (count == last_c - first_c + 1)


class FeatureBuilder:
    """
    Builds FeatureMatrix objects from an AlignedFrame for a set of issue times
    """

    def __init__(self, settings: FeatureSettings, load_column: str, weather_columns: Dict[str, str],
                 profile: Optional[LagProfile] = None, seed: int = 0):
        """
        Initialize the builder

        Args:
            settings (FeatureSettings): Feature options
            load_column (str): Load column id in the frame
            weather_columns (dict): weather kind -> column id
            profile (LagProfile, optional): Weather lags (zero when absent)
            seed (int): Seed for weather noise injection
        """
        self.settings = settings
        self.load_column = load_column
        self.weather_columns = dict(weather_columns)
        self.profile = profile or LagProfile()
        self.seed = seed
        if settings.btm.enabled and "ghi" not in self.weather_columns:
            raise ConfigError("The BTM column needs a ghi weather channel")
        logger.debug(f"FeatureBuilder for {load_column} with weather {sorted(self.weather_columns)}")

    @classmethod
    def for_frame(cls, frame: AlignedFrame, settings: FeatureSettings, profile: Optional[LagProfile] = None,
                  seed: int = 0, load_column: Optional[str] = None) -> "FeatureBuilder":
        """
        Pick the load column and the configured weather channels present in a frame
        """
        loads = frame.column_names(ChannelKind.LOAD)
        if load_column is None:
            if not loads:
                raise DataError("Frame has no load column")
            load_column = loads[0]
        elif load_column not in frame.columns:
            raise DataError(f"Load column {load_column} not in frame", {"columns": frame.column_names()})
        weather = {}
        for kind in settings.weather:
            matches = frame.column_names(ChannelKind(kind))
            if matches:
                weather[kind] = matches[0]
            else:
                logger.warning(f"Weather channel {kind} not present; skipping it")
        return cls(settings, load_column, weather, profile, seed)

    @property
    def columns(self) -> Tuple[str, ...]:
        names = [f"w_{kind}" for kind in self.weather_columns]
        names += [f"load_lag_{j}" for j in range(self.settings.load_lags)]
        if self.settings.seasonal_lags:
            names += ["load_prev_day", "load_prev_week"]
        names += list(TIME_COLUMNS)
        if self.settings.btm.enabled:
            names.append("btm_mw")
        return tuple(names)

    @property
    def future_columns(self) -> FrozenSet[str]:
        if not self.settings.future_weather:
            return frozenset()
        names = {f"w_{kind}" for kind in self.weather_columns}
        if self.settings.btm.enabled:
            names.add("btm_mw")
        return frozenset(names)

    def _positions(self, frame: AlignedFrame, issue_times) -> Tuple[pd.DatetimeIndex, np.ndarray]:
        issue_times = to_utc_index(issue_times)
        positions = np.array([frame.position(t) for t in issue_times], dtype=int)
        return issue_times, positions

    def _weather_positions(self, positions: np.ndarray, kind: str) -> np.ndarray:
        leads = self.settings.lead_hours
        tau = self.profile.lag_for(kind)
        index = positions[:, None] + leads[None, :] - tau
        if not self.settings.future_weather:
            index = np.minimum(index, positions[:, None])
        return index

    def valid_mask(self, frame: AlignedFrame, issue_times, require_targets: bool = True) -> np.ndarray:
        """
        Issue times whose context, target window and weather cells are all present
        """
        _, positions = self._positions(frame, issue_times)
        n = len(frame.timestamps)
        horizon = self.settings.horizon_hours
        load_cum = np.concatenate([[0], np.cumsum(frame.mask[self.load_column])])
        valid = positions >= 0
        valid &= _window_complete(load_cum, positions - self.settings.context_hours + 1, positions, n)
        if require_targets:
            valid &= _window_complete(load_cum, positions + 1, positions + horizon, n)
        for kind, column in self.weather_columns.items():
            index = self._weather_positions(positions, kind)
            inside = ((index >= 0) & (index < n)).all(axis=1)
            present = np.zeros_like(inside)
            clipped = np.clip(index, 0, n - 1)
            present[inside] = frame.mask[column][clipped[inside]].all(axis=1)
            valid &= inside & present
        return valid

    def valid_issue_times(self, frame: AlignedFrame, issue_times, require_targets: bool = True) -> pd.DatetimeIndex:
        issue_times = to_utc_index(issue_times)
        return issue_times[self.valid_mask(frame, issue_times, require_targets)]

    def build(self, frame: AlignedFrame, issue_times, normalizer: Optional[NormalizerState] = None,
              require_targets: bool = True) -> FeatureMatrix:
        """
        Build the feature tensor, skipping issue times with gaps

        Args:
            frame (AlignedFrame): Source data
            issue_times: Candidate issue times
            normalizer (NormalizerState, optional): z-scores load and weather columns
            require_targets (bool): Skip issue times whose target window is incomplete

        Returns:
            FeatureMatrix: Rows for the valid issue times
        """
        issue_times = to_utc_index(issue_times)
        valid = self.valid_mask(frame, issue_times, require_targets)
        skipped = int((~valid).sum())
        if skipped:
            logger.warning(f"Skipped {skipped} of {len(issue_times)} issue times with gaps")
        issue_times = issue_times[valid]
        _, positions = self._positions(frame, issue_times)

        settings = self.settings
        leads = settings.lead_hours
        n = len(frame.timestamps)
        load = np.asarray(frame.columns[self.load_column])
        shape = (len(positions), len(leads))
        blocks: List[np.ndarray] = []
        rng = np.random.default_rng(self.seed)

        def load_units(values):
            return values if normalizer is None else normalizer.apply(values, self.load_column)

        for kind, column in self.weather_columns.items():
            index = self._weather_positions(positions, kind)
            values = np.asarray(frame.columns[column])[index] if index.size else np.zeros(shape)
            if settings.weather_noise_std > 0 and index.size:
                scale = normalizer.std[column] if normalizer is not None else float(np.nanstd(frame.columns[column]))
                future = index > positions[:, None]
                noise = rng.normal(0.0, settings.weather_noise_std * scale, size=shape)
                values = values + np.where(future, noise, 0.0)
            blocks.append(values if normalizer is None else normalizer.apply(values, column))

        for j in range(settings.load_lags):
            blocks.append(np.repeat(load_units(load[positions - j])[:, None], len(leads), axis=1))
        if settings.seasonal_lags:
            day_back = 24 * np.ceil(leads / 24.0).astype(int)
            blocks.append(load_units(load[positions[:, None] + leads[None, :] - day_back[None, :]]))
            blocks.append(load_units(load[positions[:, None] + leads[None, :] - 168]))

        target_index = positions[:, None] + leads[None, :]
        flat_times = pd.DatetimeIndex(frame.timestamps[0] + pd.to_timedelta(target_index.ravel(), unit="h"))
        encodings = time_features(flat_times, settings.timezone).reshape(shape + (4,))
        blocks.extend(encodings[:, :, k] for k in range(4))

        if settings.btm.enabled:
            blocks.append(self._btm_column(frame, positions, flat_times, shape, normalizer))

        values = np.stack(blocks, axis=2) if blocks else np.zeros(shape + (0,))
        targets = np.full(shape, np.nan)
        inside = target_index < n
        targets[inside] = np.where(frame.mask[self.load_column][np.clip(target_index, 0, n - 1)],
                                   load[np.clip(target_index, 0, n - 1)], np.nan)[inside]

        logger.debug(f"Built features: {len(issue_times)} issue times x {len(leads)} leads x {len(self.columns)} columns")
        return FeatureMatrix(issue_times, leads, self.columns, values, targets, self.future_columns)

    def _btm_column(self, frame: AlignedFrame, positions: np.ndarray, flat_times: pd.DatetimeIndex,
                    shape, normalizer: Optional[NormalizerState]) -> np.ndarray:
        btm = self.settings.btm
        phi, g = btm.maps()
        ghi_index = self._weather_positions(positions, "ghi")
        ghi = np.asarray(frame.columns[self.weather_columns["ghi"]])[ghi_index].ravel()
        gate = daylight_gate(flat_times, self.settings.timezone, btm.sunrise, btm.sunset, btm.ramp_hours)
        contribution = np.array([
            btm_fuse(0.0, [btm.capacity_mw], [ghi_k], float(gate_k), phi, g)[0]
            for ghi_k, gate_k in zip(ghi, gate)
        ]).reshape(shape)
        if normalizer is not None:
            contribution = contribution / normalizer.std[self.load_column]
        return contribution

