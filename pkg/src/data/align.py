"""
Timestamp alignment of hourly series onto a common grid
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.data.series import HOUR, ChannelKind, HourlySeries, TimeRange, to_utc, to_utc_index
from src.utils.errors import ConfigError, DataError, GapInWindow, NoOverlap

logger = logging.getLogger(__name__)

GRID_MODES = ("union", "intersection")
FILL_MODES = ("drop", "ffill")


@dataclass(frozen=True)
class GapPolicy:
    """
    How to build the common grid and what to do with absent cells

    Attributes:
        grid: 'union' spans min(first)..max(last); 'intersection' spans
            max(first)..min(last)
        fill: 'drop' leaves absences absent; 'ffill' carries the last value
            across runs of at most ``limit`` missing hours
        limit: longest run (hours) that forward fill may bridge
    """
    grid: str = "union"
    fill: str = "drop"
    limit: int = 3

    def __post_init__(self):
        if self.grid not in GRID_MODES:
            raise ConfigError(f"Unknown grid mode: {self.grid}", {"allowed": list(GRID_MODES)})
        if self.fill not in FILL_MODES:
            raise ConfigError(f"Unknown fill mode: {self.fill}", {"allowed": list(FILL_MODES)})
        if self.limit < 0:
            raise ConfigError("Forward-fill limit must be non-negative", {"limit": self.limit})


@dataclass(frozen=True)
class AlignedFrame:
    """
    Several channels on one hourly grid with a presence mask

    Absent cells hold NaN and have mask False.
    """
    timestamps: pd.DatetimeIndex
    columns: Dict[str, np.ndarray]
    mask: Dict[str, np.ndarray]
    kinds: Dict[str, ChannelKind]

    def __post_init__(self):
        n = len(self.timestamps)
        for name, values in self.columns.items():
            present = self.mask[name]
            if values.shape != (n,) or present.shape != (n,):
                raise DataError(f"Column {name} does not match the grid length", {"column": name})
            if not np.isfinite(values[present]).all():
                raise DataError(f"Column {name} has a present cell with a non-finite value", {"column": name})
            values.setflags(write=False)
            present.setflags(write=False)

    @property
    def span(self) -> TimeRange:
        return TimeRange(self.timestamps[0], self.timestamps[-1])

    def column_names(self, kind: Optional[ChannelKind] = None) -> List[str]:
        return [name for name in self.columns if kind is None or self.kinds[name] == kind]

    def position(self, timestamp) -> int:
        """
        Grid index of an instant, or -1 when it lies off the grid
        """
        ts = to_utc(timestamp)
        offset = (ts - self.timestamps[0]) / HOUR
        if offset < 0 or offset >= len(self.timestamps) or offset != int(offset):
            return -1
        return int(offset)

    def value(self, name: str, timestamp) -> float:
        """
        Present value of a column at an instant

        Raises:
            GapInWindow: If the cell is absent or off the grid
        """
        pos = self.position(timestamp)
        if pos < 0 or not self.mask[name][pos]:
            raise GapInWindow(f"No value for {name} at {to_utc(timestamp).isoformat()}",
                              {"column": name, "timestamp": timestamp})
        return float(self.columns[name][pos])

    def window_complete(self, name: str, start, end) -> bool:
        """
        True when every hour in [start, end] is on the grid and present
        """
        first, last = self.position(start), self.position(end)
        if first < 0 or last < 0:
            return False
        return bool(self.mask[name][first:last + 1].all())

    def restrict(self, time_range: TimeRange) -> "AlignedFrame":
        """
        Copy of the frame limited to a time range
        """
        keep = time_range.contains(self.timestamps)
        return AlignedFrame(
            self.timestamps[keep],
            {k: v[keep].copy() for k, v in self.columns.items()},
            {k: m[keep].copy() for k, m in self.mask.items()},
            dict(self.kinds),
        )

    def with_values(self, name: str, values: np.ndarray) -> "AlignedFrame":
        """
        Copy of the frame with one column's values replaced (mask unchanged)
        """
        columns = {k: v.copy() for k, v in self.columns.items()}
        columns[name] = np.where(self.mask[name], np.asarray(values, dtype=float), np.nan)
        return AlignedFrame(self.timestamps, columns,
                            {k: m.copy() for k, m in self.mask.items()}, dict(self.kinds))

    def to_pandas(self) -> pd.DataFrame:
        return pd.DataFrame({k: np.asarray(v) for k, v in self.columns.items()}, index=self.timestamps)


def _grid_for(series: Sequence[HourlySeries], mode: str) -> pd.DatetimeIndex:
    firsts = [s.timestamps[0] for s in series]
    lasts = [s.timestamps[-1] for s in series]
    if mode == "intersection":
        start, end = max(firsts), min(lasts)
    else:
        start, end = min(firsts), max(lasts)
    if end < start:
        return pd.DatetimeIndex([], tz="UTC")
    return pd.date_range(start, end, freq="h")


def _bounded_forward_fill(values: np.ndarray, present: np.ndarray, limit: int):
    """
    Fill runs of absent cells whose full length is <= limit with the preceding value
    """
    values = values.copy()
    present = present.copy()
    n = len(values)
    i = 0
    while i < n:
        if present[i]:
            i += 1
            continue
        run_end = i
        while run_end < n and not present[run_end]:
            run_end += 1
        if i > 0 and run_end - i <= limit:
            values[i:run_end] = values[i - 1]
            present[i:run_end] = True
        i = run_end
    return values, present


def align(series: Iterable[HourlySeries], policy: Optional[GapPolicy] = None) -> AlignedFrame:
    """
    Place series on a common hourly grid

    Args:
        series (iterable): Series to align; ids become column names
        policy (GapPolicy, optional): Grid and fill policy (default union/drop)

    Returns:
        AlignedFrame: Frame with one column per series

    Raises:
        DataError: If no series are given or ids collide
        NoOverlap: If the chosen grid is empty
    """
    series = list(series)
    policy = policy or GapPolicy()
    if not series:
        raise DataError("align needs at least one series")
    ids = [s.id for s in series]
    if len(set(ids)) != len(ids):
        raise DataError("Series ids must be unique for alignment", {"ids": ids})

    grid = _grid_for(series, policy.grid)
    if len(grid) == 0:
        raise NoOverlap("Series share no common hours", {"ids": ids, "grid": policy.grid})

    columns, mask, kinds = {}, {}, {}
    for s in series:
        reindexed = s.to_series().reindex(grid)
        values = reindexed.to_numpy(dtype=float)
        present = ~np.isnan(values)
        if policy.fill == "ffill":
            values, present = _bounded_forward_fill(values, present, policy.limit)
        columns[s.id] = values
        mask[s.id] = present
        kinds[s.id] = s.channel_kind
        missing = int((~present).sum())
        if missing:
            logger.debug(f"Column {s.id}: {missing} absent cells after alignment")

    logger.debug(f"Aligned {len(series)} series onto {len(grid)} hours ({policy.grid}/{policy.fill})")
    return AlignedFrame(to_utc_index(grid), columns, mask, kinds)
