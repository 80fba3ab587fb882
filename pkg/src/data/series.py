"""
Core hourly time-series types
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np
import pandas as pd

from src.utils.errors import DataError, EmptySeries

logger = logging.getLogger(__name__)

HOUR = pd.Timedelta(hours=1)

TimestampLike = Union[str, pd.Timestamp, np.datetime64]


class ChannelKind(str, Enum):
    """
    Physical meaning (and unit) of an hourly channel
    """
    LOAD = "load"                # MW
    TEMPERATURE = "temperature"  # degC
    DEWPOINT = "dewpoint"        # degC
    HUMIDITY = "humidity"        # %
    WIND_SPEED = "wind_speed"    # m/s
    WIND_DIR = "wind_dir"        # degrees
    CLOUD_COVER = "cloud_cover"  # oktas
    GHI = "ghi"                  # W/m2
    PRESSURE = "pressure"        # hPa
    LMP_DA = "lmp_da"            # $/MWh
    LMP_RT = "lmp_rt"            # $/MWh

    @property
    def is_weather(self) -> bool:
        return self not in (ChannelKind.LOAD, ChannelKind.LMP_DA, ChannelKind.LMP_RT)


def to_utc(value: TimestampLike) -> pd.Timestamp:
    """
    Coerce a timestamp-like value to a UTC pandas Timestamp

    Naive values are interpreted as UTC.
    """
    ts = pd.Timestamp(value)
    if ts.tzinfo is None:
        return ts.tz_localize("UTC")
    return ts.tz_convert("UTC")


def to_utc_index(values) -> pd.DatetimeIndex:
    index = pd.DatetimeIndex(values)
    if index.tz is None:
        return index.tz_localize("UTC")
    return index.tz_convert("UTC")


@dataclass(frozen=True)
class TimeRange:
    """
    Closed interval [start, end] of hourly UTC instants
    """
    start: pd.Timestamp
    end: pd.Timestamp

    def __post_init__(self):
        object.__setattr__(self, "start", to_utc(self.start))
        object.__setattr__(self, "end", to_utc(self.end))
        if self.end < self.start:
            raise DataError("TimeRange end precedes start",
                            {"start": self.start, "end": self.end})

    def contains(self, timestamps) -> np.ndarray:
        index = to_utc_index(timestamps)
        return np.asarray((index >= self.start) & (index <= self.end))

    @property
    def hours(self) -> int:
        """Number of hourly instants in the range."""
        return int((self.end - self.start) / HOUR) + 1

    def grid(self) -> pd.DatetimeIndex:
        return pd.date_range(self.start, self.end, freq="h")

    def describe(self) -> str:
        return f"{self.start.isoformat()}/{self.end.isoformat()}"


@dataclass(frozen=True)
class HourlySeries:
    """
    Timestamped hourly scalar series with gap metadata

    Stored timestamps sit on the hourly grid and strictly increase; missing
    hours are absent rows and are reported by ``gap_report``.
    """
    id: str
    channel_kind: ChannelKind
    timestamps: pd.DatetimeIndex
    values: np.ndarray
    dropped_rows: int = field(default=0, compare=False)

    def __post_init__(self):
        kind = ChannelKind(self.channel_kind)
        timestamps = to_utc_index(self.timestamps)
        values = np.array(self.values, dtype=float, copy=True)

        if len(timestamps) == 0:
            raise EmptySeries(f"Series {self.id} has no rows", {"series": self.id})
        if values.shape != (len(timestamps),):
            raise DataError(f"Series {self.id}: {len(timestamps)} timestamps but values shape {values.shape}",
                            {"series": self.id})
        if not (timestamps == timestamps.floor("h")).all():
            raise DataError(f"Series {self.id} has timestamps off the hourly grid", {"series": self.id})
        if len(timestamps) > 1 and not (np.diff(timestamps.asi8) > 0).all():
            raise DataError(f"Series {self.id} timestamps are not strictly increasing", {"series": self.id})
        if not np.isfinite(values).all():
            raise DataError(f"Series {self.id} contains non-finite values", {"series": self.id})

        values.setflags(write=False)
        object.__setattr__(self, "channel_kind", kind)
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def span(self) -> TimeRange:
        return TimeRange(self.timestamps[0], self.timestamps[-1])

    def gap_report(self) -> pd.DatetimeIndex:
        """
        List the hours missing between the first and last stored stamp

        Returns:
            pd.DatetimeIndex: Missing hourly instants (empty when contiguous)
        """
        return self.span.grid().difference(self.timestamps)

    def to_series(self) -> pd.Series:
        return pd.Series(np.asarray(self.values), index=self.timestamps, name=self.id)

    @classmethod
    def from_pandas(cls, series_id: str, kind: ChannelKind, series: pd.Series,
                    dropped_rows: int = 0) -> "HourlySeries":
        """
        Build a series from a pandas Series indexed by timestamps

        Args:
            series_id (str): Series label
            kind (ChannelKind): Channel kind
            series (pd.Series): Values indexed by timestamp
            dropped_rows (int): Rows discarded upstream

        Returns:
            HourlySeries: Validated series (sorted by timestamp)
        """
        series = series.sort_index()
        return cls(series_id, kind, series.index, series.to_numpy(dtype=float), dropped_rows)
