"""
Series Parser Interface for CSV ingestion
"""
import logging
from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.data.series import ChannelKind, HourlySeries
from src.utils.errors import ConfigError, DataError, DuplicateTimestamp, EmptySeries, MissingHeader
from src.utils.file_utils import require_file

logger = logging.getLogger(__name__)


class SeriesParser(ABC):
    """
    Abstract base class for CSV series parsers
    """

    required_columns: Sequence[str] = ()

    def __init__(self, config: Optional[Dict] = None):
        """
        Initialize the parser

        Args:
            config (dict, optional): Parser options
        """
        self.config = config or {}
        logger.debug(f"Initialized {self.__class__.__name__} with config: {self.config}")

    def parse_file(self, file_path: str) -> List[HourlySeries]:
        """
        Parse a CSV file into hourly series

        Args:
            file_path (str): Path to the CSV file

        Returns:
            list: One HourlySeries per (area/node, channel)
        """
        require_file(file_path)
        try:
            frame = pd.read_csv(file_path, dtype=str, keep_default_na=False)
        except pd.errors.EmptyDataError as e:
            raise MissingHeader(f"File has no header: {file_path}", {"path": file_path}) from e
        series = self.parse_frame(frame, source=file_path)
        logger.info(f"Parsed {len(series)} series from {file_path}")
        return series

    @abstractmethod
    def parse_frame(self, frame: pd.DataFrame, source: str = "<frame>") -> List[HourlySeries]:
        """
        Parse an already loaded table (all cells as strings)

        Args:
            frame (pd.DataFrame): Raw table
            source (str): Label used in messages

        Returns:
            list: Parsed series
        """
        pass

    def check_header(self, frame: pd.DataFrame, source: str) -> None:
        missing = [c for c in self.required_columns if c not in frame.columns]
        if missing:
            raise MissingHeader(f"{source}: missing columns {missing}",
                                {"path": source, "missing": missing, "found": list(frame.columns)})

    @staticmethod
    def parse_timestamps(raw: pd.Series) -> pd.Series:
        """
        Parse ISO-8601 timestamps to UTC; unparseable cells become NaT
        """
        return pd.to_datetime(raw, utc=True, errors="coerce", format="ISO8601")

    @staticmethod
    def parse_values(raw: pd.Series) -> pd.Series:
        """
        Parse numeric cells; unparseable or non-finite cells become NaN
        """
        values = pd.to_numeric(raw, errors="coerce").astype(float)
        return values.where(np.isfinite(values))

    def build_series(self, series_id: str, kind: ChannelKind, timestamps: pd.Series,
                     values: pd.Series, source: str) -> HourlySeries:
        """
        Drop invalid rows, resolve duplicates and build one series

        Identical duplicates are collapsed silently; duplicates with differing
        values are an error.
        """
        valid = timestamps.notna() & values.notna()
        dropped = int((~valid).sum())
        if dropped:
            logger.warning(f"{source}: dropped {dropped} invalid rows for {series_id}")
        data = pd.Series(values[valid].to_numpy(), index=pd.DatetimeIndex(timestamps[valid]))
        if data.empty:
            raise EmptySeries(f"{source}: no valid rows for {series_id}", {"path": source, "series": series_id})

        if not (data.index == data.index.floor("h")).all():
            raise DataError(f"{source}: timestamps for {series_id} are not on the hourly grid",
                            {"path": source, "series": series_id})

        data = self.resolve_duplicates(data, series_id, source)
        return HourlySeries.from_pandas(series_id, kind, data, dropped_rows=dropped)

    @staticmethod
    def resolve_duplicates(data: pd.Series, series_id: str, source: str) -> pd.Series:
        """
        Collapse identical duplicate stamps; reject conflicting ones

        Raises:
            DuplicateTimestamp: If one stamp carries two different values
        """
        duplicated = data.index.duplicated(keep=False)
        if not duplicated.any():
            return data
        spread = data[duplicated].groupby(level=0).nunique()
        conflicts = spread[spread > 1]
        if not conflicts.empty:
            raise DuplicateTimestamp(
                f"{source}: {len(conflicts)} timestamps for {series_id} carry differing values",
                {"path": source, "series": series_id, "first": conflicts.index[0].isoformat()},
            )
        return data[~data.index.duplicated(keep="first")]


class SeriesParserFactory:
    """
    Factory class to create the parser for a CSV schema
    """

    def get_parser(self, schema: str, config: Optional[Dict] = None) -> SeriesParser:
        """
        Get a parser for the specified schema

        Args:
            schema (str): 'load', 'weather' or 'lmp_oasis'
            config (dict, optional): Parser options

        Returns:
            SeriesParser: Appropriate parser instance

        Raises:
            ConfigError: If the schema is not supported
        """
        schema = schema.lower()

        if schema == 'load':
            from src.ingest.load_parser import LoadParser
            return LoadParser(config)
        elif schema == 'weather':
            from src.ingest.weather_parser import WeatherParser
            return WeatherParser(config)
        elif schema == 'lmp_oasis':
            from src.ingest.oasis_parser import OasisParser
            return OasisParser(config)
        else:
            raise ConfigError(f"Unsupported CSV schema: {schema}",
                              {"schema": schema, "allowed": ["load", "weather", "lmp_oasis"]})


def ingest_csv(path: str, schema: str, config: Optional[Dict] = None) -> List[HourlySeries]:
    """
    Parse a CSV file with the parser registered for its schema

    Args:
        path (str): CSV file path
        schema (str): 'load', 'weather' or 'lmp_oasis'
        config (dict, optional): Parser options

    Returns:
        list: Parsed HourlySeries, sorted by id
    """
    parser = SeriesParserFactory().get_parser(schema, config)
    return sorted(parser.parse_file(path), key=lambda s: s.id)
