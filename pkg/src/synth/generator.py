"""
Deterministic synthetic load, weather and market dataset
"""
import logging
import os
from dataclasses import dataclass
from typing import Dict, List

import numpy as np
import pandas as pd

from src.data.series import ChannelKind, HourlySeries, to_utc
from src.ingest.weather_parser import WEATHER_COLUMNS
from src.utils.errors import ConfigError
from src.utils.file_utils import ensure_dir, write_csv

logger = logging.getLogger(__name__)

PROFILES = ("duck", "flat", "heatwave")
TIME_FORMAT = "%Y-%m-%dT%H:%M:%SZ"
OASIS_TIME_FORMAT = "%Y-%m-%dT%H:%M:%S+00:00"
FLOAT_FORMAT = "%.3f"

FLAT_WEATHER = {
    "temp_c": 15.0, "dewpoint_c": 8.0, "humidity_pct": 50.0, "wind_ms": 3.0,
    "wind_dir_deg": 180.0, "cloud_oktas": 2.0, "ghi_wm2": 0.0, "pressure_hpa": 1013.0,
}


@dataclass(frozen=True)
class SynthSettings:
    """
    Attributes:
        seed: generator seed
        days: length of the dataset
        profile: 'duck' (midday trough, evening ramp), 'flat' (constant
            load and weather) or 'heatwave' (duck plus hot spike episodes)
        temperature_lag: hours between a temperature change and the load response
        utc_offset_hours: fixed offset of the local clock that drives the daily cycle
    """
    seed: int = 0
    days: int = 400
    profile: str = "duck"
    start: str = "2024-01-01T00:00:00Z"
    area: str = "SYN"
    node: str = "SYN_NODE"
    temperature_lag: int = 3
    utc_offset_hours: int = -8
    base_load_mw: float = 20000.0
    load_per_degree_mw: float = 400.0

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ConfigError(f"Unknown synthetic profile: {self.profile}", {"allowed": list(PROFILES)})
        if self.days < 1:
            raise ConfigError("days must be positive", {"days": self.days})
        if not 0 <= self.temperature_lag <= 12:
            raise ConfigError("temperature_lag must lie in 0..12", {"temperature_lag": self.temperature_lag})


@dataclass(frozen=True)
class SynthDataset:
    settings: SynthSettings
    load: pd.DataFrame
    weather: pd.DataFrame
    lmp_da: pd.DataFrame
    lmp_rt: pd.DataFrame
    sld_fcst: pd.DataFrame

    def load_series(self) -> HourlySeries:
        return HourlySeries(f"{self.settings.area}:load", ChannelKind.LOAD,
                            pd.DatetimeIndex(self.load["timestamp"]), self.load["load_mw"].to_numpy())

    def weather_series(self, kind: str) -> HourlySeries:
        column = next(c for c, k in WEATHER_COLUMNS.items() if k.value == kind)
        return HourlySeries(f"{self.settings.area}:{kind}", ChannelKind(kind),
                            pd.DatetimeIndex(self.weather["timestamp"]), self.weather[column].to_numpy())

    def write(self, out_dir: str) -> Dict[str, str]:
        """
        Write the five CSV files (fixed float format, ISO timestamps)

        Returns:
            dict: file role -> path
        """
        ensure_dir(out_dir)
        paths = {}
        for name, frame, time_format in (
            ("load", self.load, TIME_FORMAT),
            ("weather", self.weather, TIME_FORMAT),
            ("lmp_da", self.lmp_da, OASIS_TIME_FORMAT),
            ("lmp_rt", self.lmp_rt, OASIS_TIME_FORMAT),
            ("sld_fcst", self.sld_fcst, OASIS_TIME_FORMAT),
        ):
            out = frame.copy()
            for column in out.columns:
                if pd.api.types.is_datetime64_any_dtype(out[column]):
                    out[column] = out[column].dt.strftime(time_format)
            paths[name] = write_csv(os.path.join(out_dir, f"{name}.csv"), out, float_format=FLOAT_FORMAT)
        logger.info(f"Wrote synthetic {self.settings.profile} dataset ({self.settings.days} days) to {out_dir}")
        return paths


def _ar1(rng: np.random.Generator, n: int, phi: float, sigma: float) -> np.ndarray:
    """
    Stationary AR(1) with marginal standard deviation sigma
    """
    innovations = rng.normal(0.0, sigma * np.sqrt(1.0 - phi * phi), size=n)
    values = np.empty(n)
    values[0] = rng.normal(0.0, sigma)
    for i in range(1, n):
        values[i] = phi * values[i - 1] + innovations[i]
    return values


def _local_hour(timestamps: pd.DatetimeIndex, offset: int) -> np.ndarray:
    return np.asarray((timestamps.hour + offset) % 24, dtype=float)


def _heatwave_bump(rng: np.random.Generator, n: int, days: int) -> np.ndarray:
    bump = np.zeros(n)
    for _ in range(max(1, days // 60)):
        first = int(rng.integers(0, max(1, days - 3))) * 24
        bump[first:first + 72] += 8.0
    return bump


def _weather(rng, settings: SynthSettings, timestamps: pd.DatetimeIndex, temperature: np.ndarray) -> pd.DataFrame:
    n = len(timestamps)
    frame = pd.DataFrame({"timestamp": timestamps, "area": settings.area})
    if settings.profile == "flat":
        for column, value in FLAT_WEATHER.items():
            frame[column] = value
        return frame
    hour = _local_hour(timestamps, settings.utc_offset_hours)
    cloud = np.clip(np.round(3.0 + _ar1(rng, n, 0.9, 1.5)), 0.0, 8.0)
    daylight = np.clip(np.sin(np.pi * (hour - 6.0) / 13.0), 0.0, None) * ((hour >= 6) & (hour <= 19))
    frame["temp_c"] = temperature
    frame["dewpoint_c"] = temperature - 6.0 + rng.normal(0.0, 1.0, n)
    frame["humidity_pct"] = np.clip(70.0 - 2.0 * (temperature - 15.0) + rng.normal(0.0, 5.0, n), 5.0, 100.0)
    frame["wind_ms"] = np.abs(4.0 + _ar1(rng, n, 0.85, 1.5))
    frame["wind_dir_deg"] = np.mod(200.0 + np.cumsum(rng.normal(0.0, 10.0, n)), 360.0)
    frame["cloud_oktas"] = cloud
    frame["ghi_wm2"] = 950.0 * daylight * (1.0 - 0.08 * cloud)
    frame["pressure_hpa"] = 1013.0 + _ar1(rng, n, 0.95, 4.0)
    return frame


def _prices(rng, settings: SynthSettings, timestamps: pd.DatetimeIndex, load: np.ndarray,
            da_forecast: np.ndarray):
    n = len(timestamps)
    hour = _local_hour(timestamps, settings.utc_offset_hours)
    da = 40.0 + 15.0 * np.sin(2 * np.pi * (hour - 13.0) / 24.0) + rng.normal(0.0, 3.0, n)
    # RT clears above DA when load comes in over the DA forecast, with occasional scarcity spikes
    surprise = (load - da_forecast) / max(float(np.std(load - da_forecast)), 1e-9)
    spikes = rng.exponential(40.0, n) * (rng.random(n) < 0.05)
    rt = da + 4.0 * surprise + spikes + rng.normal(0.0, 2.0, n)

    da_rows = []
    for component, values in (("LMP", da), ("MCE", da - 1.5)):
        da_rows.append(pd.DataFrame({
            "INTERVALSTARTTIME_GMT": timestamps,
            "INTERVALENDTIME_GMT": timestamps + pd.Timedelta(hours=1),
            "NODE": settings.node,
            "MARKET_RUN_ID": "DAM",
            "LMP_TYPE": component,
            "MW": values,
        }))
    lmp_da = pd.concat(da_rows, ignore_index=True).sort_values(
        ["INTERVALSTARTTIME_GMT", "LMP_TYPE"], kind="stable", ignore_index=True)

    # twelve 5-minute intervals per hour with an exact hourly mean
    jitter = rng.normal(0.0, 5.0, (n, 12))
    jitter -= jitter.mean(axis=1, keepdims=True)
    intervals = rt[:, None] + jitter
    starts = timestamps.repeat(12) + pd.to_timedelta(np.tile(np.arange(12) * 5, n), unit="min")
    lmp_rt = pd.DataFrame({
        "INTERVALSTARTTIME_GMT": starts,
        "INTERVALENDTIME_GMT": starts + pd.Timedelta(minutes=5),
        "NODE": settings.node,
        "MARKET_RUN_ID": "RTM",
        "LMP_TYPE": "LMP",
        "MW": intervals.ravel(),
    })
    return lmp_da, lmp_rt


def generate(settings: SynthSettings) -> SynthDataset:
    """
    Generate the dataset

    Load responds to temperature ``temperature_lag`` hours earlier, carries a
    daily cycle phase-aligned with the lagged temperature cycle, duck-curve
    harmonics, a weekend dip and noise. The flat profile is constant.

    Args:
        settings (SynthSettings): Generator settings

    Returns:
        SynthDataset: Tables in the ingestion layouts
    """
    rng = np.random.default_rng(settings.seed)
    n = settings.days * 24
    lag = settings.temperature_lag
    start = to_utc(settings.start).floor("h")
    timestamps = pd.date_range(start, periods=n, freq="h")
    extended = pd.date_range(start - pd.Timedelta(hours=lag), periods=n + lag, freq="h")
    hour_ext = _local_hour(extended, settings.utc_offset_hours)

    if settings.profile == "flat":
        temperature_ext = np.full(n + lag, FLAT_WEATHER["temp_c"])
    else:
        temperature_ext = 15.0 + 6.0 * np.sin(2 * np.pi * (hour_ext - 9.0) / 24.0) + _ar1(rng, n + lag, 0.8, 3.0)
        if settings.profile == "heatwave":
            temperature_ext += np.concatenate([np.zeros(lag), _heatwave_bump(rng, n, settings.days)])
    temperature = temperature_ext[lag:]
    lagged_temperature = temperature_ext[:n]

    if settings.profile == "flat":
        load = np.full(n, settings.base_load_mw)
    else:
        hour = _local_hour(timestamps, settings.utc_offset_hours)
        weekend = np.asarray(timestamps.dayofweek >= 5, dtype=float)
        load = (settings.base_load_mw
                + settings.load_per_degree_mw * (lagged_temperature - 15.0)
                + 1500.0 * np.sin(2 * np.pi * (hour - lag - 9.0) / 24.0)
                + 800.0 * np.sin(4 * np.pi * (hour - 14.0) / 24.0)
                + 400.0 * np.sin(6 * np.pi * (hour - 16.0) / 24.0)
                - 1200.0 * weekend
                + rng.normal(0.0, 150.0, n))

    weather = _weather(rng, settings, timestamps, temperature)
    da_forecast = load * (1.0 + rng.normal(0.0, 0.02, n))
    lmp_da, lmp_rt = _prices(rng, settings, timestamps, load, da_forecast)

    load_frame = pd.DataFrame({"timestamp": timestamps, "area": settings.area, "load_mw": load})
    sld_rows: List[pd.DataFrame] = []
    for run, values in (("ACTUAL", load), ("DAM", da_forecast)):
        sld_rows.append(pd.DataFrame({
            "INTERVALSTARTTIME_GMT": timestamps,
            "INTERVALENDTIME_GMT": timestamps + pd.Timedelta(hours=1),
            "TAC_AREA_NAME": f"{settings.area}-TAC",
            "MARKET_RUN_ID": run,
            "MW": values,
        }))
    sld_fcst = pd.concat(sld_rows, ignore_index=True)
    logger.debug(f"Generated {n} hours ({settings.profile}, seed {settings.seed})")
    return SynthDataset(settings, load_frame, weather, lmp_da, lmp_rt, sld_fcst)
