"""
Load CSV parser: timestamp,area,load_mw
"""
import logging
from typing import List

import pandas as pd

from src.data.series import ChannelKind, HourlySeries
from src.ingest.parser import SeriesParser

logger = logging.getLogger(__name__)


class LoadParser(SeriesParser):
    """
    Parser for hourly area load files
    """

    required_columns = ("timestamp", "area", "load_mw")

    def parse_frame(self, frame: pd.DataFrame, source: str = "<frame>") -> List[HourlySeries]:
        self.check_header(frame, source)
        timestamps = self.parse_timestamps(frame["timestamp"])
        values = self.parse_values(frame["load_mw"])
        series = []
        for area in sorted(frame["area"].unique()):
            rows = frame["area"] == area
            series.append(self.build_series(f"{area}:load", ChannelKind.LOAD,
                                            timestamps[rows], values[rows], source))
        return series
