"""
OASIS export parser (PRC_LMP, PRC_INTVL_LMP, SLD_FCST)
"""
import logging
from typing import List

import pandas as pd

from src.data.series import ChannelKind, HourlySeries
from src.ingest.parser import SeriesParser
from src.utils.errors import EmptySeries, MissingHeader

logger = logging.getLogger(__name__)

TIME_COLUMN = "INTERVALSTARTTIME_GMT"
NODE_COLUMNS = ("NODE", "NODE_ID", "TAC_AREA_NAME")
VALUE_COLUMNS = ("MW", "VALUE", "PRC")
RUN_COLUMN = "MARKET_RUN_ID"

PRICE_RUNS = {
    "DAM": ChannelKind.LMP_DA,
    "RTM": ChannelKind.LMP_RT,
    "RTPD": ChannelKind.LMP_RT,
    "HASP": ChannelKind.LMP_RT,
}


class OasisParser(SeriesParser):
    """
    Parser for CSV files extracted from OASIS SingleZip downloads

    Sub-hourly intervals (5-minute RTM prices) are averaged to hourly values.
    Price files keep only the total LMP component. Load-forecast files
    (SLD_FCST, keyed by TAC area) produce load series named after the market
    run, e.g. ``PGE-TAC:load_actual`` and ``PGE-TAC:load_dam``.
    """

    required_columns = (TIME_COLUMN, RUN_COLUMN)

    def parse_frame(self, frame: pd.DataFrame, source: str = "<frame>") -> List[HourlySeries]:
        self.check_header(frame, source)
        node_column = next((c for c in NODE_COLUMNS if c in frame.columns), None)
        value_column = next((c for c in VALUE_COLUMNS if c in frame.columns), None)
        if node_column is None or value_column is None:
            raise MissingHeader(f"{source}: no node or value column",
                                {"path": source, "node_columns": list(NODE_COLUMNS),
                                 "value_columns": list(VALUE_COLUMNS), "found": list(frame.columns)})

        frame = self._total_lmp_rows(frame)
        is_load = node_column == "TAC_AREA_NAME"
        timestamps = self.parse_timestamps(frame[TIME_COLUMN])
        values = self.parse_values(frame[value_column])

        series = []
        keys = frame[[node_column, RUN_COLUMN]].drop_duplicates().sort_values([node_column, RUN_COLUMN])
        for node, run in keys.itertuples(index=False):
            rows = (frame[node_column] == node) & (frame[RUN_COLUMN] == run)
            if is_load:
                kind = ChannelKind.LOAD
                series_id = f"{node}:load_{run.lower()}"
            elif run in PRICE_RUNS:
                kind = PRICE_RUNS[run]
                series_id = f"{node}:{kind.value}"
            else:
                logger.warning(f"{source}: unknown market run {run} for {node}, skipping")
                continue
            series.append(self._hourly_series(series_id, kind, timestamps[rows], values[rows], source))

        if not series:
            raise EmptySeries(f"{source}: no series could be parsed", {"path": source})
        return series

    @staticmethod
    def _total_lmp_rows(frame: pd.DataFrame) -> pd.DataFrame:
        if "LMP_TYPE" in frame.columns:
            return frame[frame["LMP_TYPE"] == "LMP"]
        if "XML_DATA_ITEM" in frame.columns and (frame["XML_DATA_ITEM"] == "LMP_PRC").any():
            return frame[frame["XML_DATA_ITEM"] == "LMP_PRC"]
        return frame

    def _hourly_series(self, series_id: str, kind: ChannelKind, timestamps: pd.Series,
                       values: pd.Series, source: str) -> HourlySeries:
        valid = timestamps.notna() & values.notna()
        dropped = int((~valid).sum())
        if dropped:
            logger.warning(f"{source}: dropped {dropped} invalid rows for {series_id}")
        raw = pd.Series(values[valid].to_numpy(), index=pd.DatetimeIndex(timestamps[valid]))
        if raw.empty:
            raise EmptySeries(f"{source}: no valid rows for {series_id}", {"path": source, "series": series_id})
        raw = self.resolve_duplicates(raw, series_id, source)
        hourly = raw.groupby(raw.index.floor("h")).mean()
        if len(hourly) < len(raw):
            logger.debug(f"{series_id}: averaged {len(raw)} intervals into {len(hourly)} hours")
        return HourlySeries.from_pandas(series_id, kind, hourly, dropped_rows=dropped)
