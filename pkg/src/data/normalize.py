"""
Train-only z-score normalization
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Optional

import numpy as np

from src.data.align import AlignedFrame
from src.data.series import TimeRange
from src.utils.errors import ConstantChannel, DataError, EmptySeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NormalizerState:
    """
    Per-channel mean and population standard deviation fitted on a train range
    """
    mean: Dict[str, float]
    std: Dict[str, float]
    fitted_on: TimeRange

    def _check(self, channel: str) -> None:
        if channel not in self.mean:
            raise DataError(f"Channel {channel} was not fitted", {"channel": channel})

    def apply(self, values, channel: str) -> np.ndarray:
        """
        Standardize values of one channel

        Args:
            values: Scalar or array in channel units
            channel (str): Channel id

        Returns:
            np.ndarray: (values - mean) / std
        """
        self._check(channel)
        return (np.asarray(values, dtype=float) - self.mean[channel]) / self.std[channel]

    def invert(self, values, channel: str) -> np.ndarray:
        """
        Map standardized values back to channel units
        """
        self._check(channel)
        return np.asarray(values, dtype=float) * self.std[channel] + self.mean[channel]

    def to_dict(self) -> dict:
        return {
            "mean": dict(self.mean),
            "std": dict(self.std),
            "fitted_on": self.fitted_on.describe(),
        }


def fit_normalizer(frame: AlignedFrame, train_range: TimeRange,
                   channels: Optional[Iterable[str]] = None) -> NormalizerState:
    """
    Fit z-score statistics using only present rows inside the train range

    The standard deviation is the population one (divide by n).

    Args:
        frame (AlignedFrame): Source frame
        train_range (TimeRange): Rows used for the statistics
        channels (iterable, optional): Columns to fit (default: all)

    Returns:
        NormalizerState: Fitted statistics

    Raises:
        EmptySeries: If a channel has no present rows inside the range
        ConstantChannel: If a channel has zero variance inside the range
    """
    in_range = train_range.contains(frame.timestamps)
    means, stds = {}, {}
    for name in (channels if channels is not None else frame.column_names()):
        rows = in_range & frame.mask[name]
        values = np.asarray(frame.columns[name])[rows]
        if values.size == 0:
            raise EmptySeries(f"Channel {name} has no rows in the train range",
                              {"channel": name, "train_range": train_range.describe()})
        mean = float(np.mean(values))
        std = float(np.std(values))
        if not std > 0.0:
            raise ConstantChannel(f"Channel {name} is constant on the train range",
                                  {"channel": name, "train_range": train_range.describe()})
        means[name] = mean
        stds[name] = std

    logger.debug(f"Fitted normalizer on {train_range.describe()} for {len(means)} channels")
    return NormalizerState(means, stds, train_range)
