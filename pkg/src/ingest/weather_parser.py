"""
Weather CSV parser: one series per (area, covariate)
"""
import logging
from typing import List

import pandas as pd

from src.data.series import ChannelKind, HourlySeries
from src.ingest.parser import SeriesParser
from src.utils.errors import EmptySeries

logger = logging.getLogger(__name__)

WEATHER_COLUMNS = {
    "temp_c": ChannelKind.TEMPERATURE,
    "dewpoint_c": ChannelKind.DEWPOINT,
    "humidity_pct": ChannelKind.HUMIDITY,
    "wind_ms": ChannelKind.WIND_SPEED,
    "wind_dir_deg": ChannelKind.WIND_DIR,
    "cloud_oktas": ChannelKind.CLOUD_COVER,
    "ghi_wm2": ChannelKind.GHI,
    "pressure_hpa": ChannelKind.PRESSURE,
}


class WeatherParser(SeriesParser):
    """
    Parser for hourly weather covariate files

    A covariate whose cells are all invalid for an area is skipped with a
    warning rather than failing the whole file.
    """

    required_columns = ("timestamp", "area") + tuple(WEATHER_COLUMNS)

    def parse_frame(self, frame: pd.DataFrame, source: str = "<frame>") -> List[HourlySeries]:
        self.check_header(frame, source)
        timestamps = self.parse_timestamps(frame["timestamp"])
        series = []
        for area in sorted(frame["area"].unique()):
            rows = frame["area"] == area
            for column, kind in WEATHER_COLUMNS.items():
                values = self.parse_values(frame.loc[rows, column])
                try:
                    series.append(self.build_series(f"{area}:{kind.value}", kind,
                                                    timestamps[rows], values, source))
                except EmptySeries:
                    logger.warning(f"{source}: no valid {column} values for {area}, skipping")
        if not series:
            raise EmptySeries(f"{source}: no weather series could be parsed", {"path": source})
        return series
