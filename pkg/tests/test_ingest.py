"""
CSV ingestion: load, weather and OASIS exports
"""
import pandas as pd
import pytest

from src.data.series import ChannelKind
from src.ingest.parser import SeriesParserFactory, ingest_csv
from src.ingest.weather_parser import WEATHER_COLUMNS
from src.utils.errors import ConfigError, DataError, DuplicateTimestamp, EmptySeries, MissingHeader


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_three_row_load_file(tmp_path):
    path = write(tmp_path, "load.csv", "timestamp,area,load_mw\n"
                                       "2024-01-01T00:00:00Z,PGE,100\n"
                                       "2024-01-01T01:00:00Z,PGE,110\n"
                                       "2024-01-01T02:00:00Z,PGE,120\n")
    [series] = ingest_csv(path, "load")
    assert series.id == "PGE:load"
    assert series.channel_kind == ChannelKind.LOAD
    assert len(series) == 3
    assert len(series.gap_report()) == 0


def test_missing_hour_and_invalid_rows(tmp_path):
    path = write(tmp_path, "load.csv", "timestamp,area,load_mw\n"
                                       "2024-01-01T00:00:00Z,PGE,100\n"
                                       "2024-01-01T02:00:00Z,PGE,120\n"
                                       "not-a-time,PGE,130\n"
                                       "2024-01-01T03:00:00Z,PGE,n/a\n")
    [series] = ingest_csv(path, "load")
    assert len(series) == 2
    assert len(series.gap_report()) == 1
    assert series.dropped_rows == 2


def test_offset_timestamps_converted_to_utc(tmp_path):
    path = write(tmp_path, "load.csv", "timestamp,area,load_mw\n"
                                       "2024-01-01T00:00:00-08:00,PGE,100\n")
    [series] = ingest_csv(path, "load")
    assert series.timestamps[0] == pd.Timestamp("2024-01-01T08:00:00Z")


def test_one_series_per_area(tmp_path):
    path = write(tmp_path, "load.csv", "timestamp,area,load_mw\n"
                                       "2024-01-01T00:00:00Z,SCE,1\n"
                                       "2024-01-01T00:00:00Z,PGE,2\n")
    assert [s.id for s in ingest_csv(path, "load")] == ["PGE:load", "SCE:load"]


def test_identical_duplicates_collapse(tmp_path):
    path = write(tmp_path, "load.csv", "timestamp,area,load_mw\n"
                                       "2024-01-01T00:00:00Z,PGE,100\n"
                                       "2024-01-01T00:00:00Z,PGE,100\n")
    [series] = ingest_csv(path, "load")
    assert len(series) == 1


def test_conflicting_duplicates_rejected(tmp_path):
    path = write(tmp_path, "load.csv", "timestamp,area,load_mw\n"
                                       "2024-01-01T00:00:00Z,PGE,100\n"
                                       "2024-01-01T00:00:00Z,PGE,101\n")
    with pytest.raises(DuplicateTimestamp):
        ingest_csv(path, "load")


def test_missing_column_rejected(tmp_path):
    path = write(tmp_path, "load.csv", "timestamp,load_mw\n2024-01-01T00:00:00Z,100\n")
    with pytest.raises(MissingHeader) as info:
        ingest_csv(path, "load")
    assert info.value.context["missing"] == ["area"]


def test_sub_hourly_load_rejected(tmp_path):
    path = write(tmp_path, "load.csv", "timestamp,area,load_mw\n2024-01-01T00:30:00Z,PGE,100\n")
    with pytest.raises(DataError):
        ingest_csv(path, "load")


def test_no_valid_rows(tmp_path):
    path = write(tmp_path, "load.csv", "timestamp,area,load_mw\n2024-01-01T00:00:00Z,PGE,x\n")
    with pytest.raises(EmptySeries):
        ingest_csv(path, "load")


def test_missing_file_is_data_error(tmp_path):
    with pytest.raises(DataError):
        ingest_csv(str(tmp_path / "absent.csv"), "load")


def test_unknown_schema():
    with pytest.raises(ConfigError):
        SeriesParserFactory().get_parser("xml")


def test_weather_file_yields_series_per_channel(tmp_path):
    header = "timestamp,area," + ",".join(WEATHER_COLUMNS)
    row = "2024-01-01T00:00:00Z,PGE," + ",".join(str(i) for i in range(len(WEATHER_COLUMNS)))
    series = ingest_csv(write(tmp_path, "weather.csv", f"{header}\n{row}\n"), "weather")
    kinds = {s.channel_kind for s in series}
    assert kinds == set(WEATHER_COLUMNS.values())
    temperature = next(s for s in series if s.channel_kind == ChannelKind.TEMPERATURE)
    assert temperature.id == "PGE:temperature"
    assert temperature.values[0] == 0.0


def test_weather_channel_without_values_is_skipped(tmp_path):
    header = "timestamp,area," + ",".join(WEATHER_COLUMNS)
    cells = ["1"] * len(WEATHER_COLUMNS)
    cells[list(WEATHER_COLUMNS).index("ghi_wm2")] = ""
    path = write(tmp_path, "weather.csv", f"{header}\n2024-01-01T00:00:00Z,PGE,{','.join(cells)}\n")
    kinds = {s.channel_kind for s in ingest_csv(path, "weather")}
    assert ChannelKind.GHI not in kinds
    assert ChannelKind.TEMPERATURE in kinds


def test_five_minute_prices_average_to_hourly(tmp_path):
    lines = ["INTERVALSTARTTIME_GMT,NODE,MARKET_RUN_ID,LMP_TYPE,MW"]
    for minute in range(0, 60, 5):
        lines.append(f"2024-01-01T00:{minute:02d}:00-00:00,N1,RTM,LMP,42.5")
        lines.append(f"2024-01-01T00:{minute:02d}:00-00:00,N1,RTM,MCE,999")
    for minute in range(0, 60, 5):
        lines.append(f"2024-01-01T01:{minute:02d}:00-00:00,N1,RTM,LMP,{minute}")
    [series] = ingest_csv(write(tmp_path, "rt.csv", "\n".join(lines) + "\n"), "lmp_oasis")
    assert series.id == "N1:lmp_rt"
    assert series.channel_kind == ChannelKind.LMP_RT
    assert series.values[0] == pytest.approx(42.5)
    assert series.values[1] == pytest.approx(27.5)


def test_day_ahead_prices(tmp_path):
    text = ("INTERVALSTARTTIME_GMT,NODE,MARKET_RUN_ID,XML_DATA_ITEM,MW\n"
            "2024-01-01T00:00:00-00:00,N1,DAM,LMP_PRC,30\n"
            "2024-01-01T00:00:00-00:00,N1,DAM,LMP_CONG_PRC,3\n")
    [series] = ingest_csv(write(tmp_path, "da.csv", text), "lmp_oasis")
    assert series.id == "N1:lmp_da"
    assert series.values.tolist() == [30.0]


def test_load_forecast_export(tmp_path):
    text = ("INTERVALSTARTTIME_GMT,TAC_AREA_NAME,MARKET_RUN_ID,MW\n"
            "2024-01-01T00:00:00-00:00,PGE-TAC,ACTUAL,100\n"
            "2024-01-01T00:00:00-00:00,PGE-TAC,DAM,90\n")
    series = ingest_csv(write(tmp_path, "sld.csv", text), "lmp_oasis")
    assert [s.id for s in series] == ["PGE-TAC:load_actual", "PGE-TAC:load_dam"]
    assert all(s.channel_kind == ChannelKind.LOAD for s in series)


def test_oasis_without_value_column(tmp_path):
    text = "INTERVALSTARTTIME_GMT,NODE,MARKET_RUN_ID\n2024-01-01T00:00:00-00:00,N1,DAM\n"
    with pytest.raises(MissingHeader):
        ingest_csv(write(tmp_path, "da.csv", text), "lmp_oasis")
