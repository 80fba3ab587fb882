"""
Synthetic dataset generator and its round trip through ingestion
"""
import numpy as np
import pandas as pd
import pytest

from src.features.lags import lag_scan
from src.ingest.parser import ingest_csv
from src.synth.generator import SynthSettings, generate
from src.utils.errors import ConfigError, ConstantSeries


def test_same_seed_same_data():
    a = generate(SynthSettings(seed=4, days=20))
    b = generate(SynthSettings(seed=4, days=20))
    pd.testing.assert_frame_equal(a.load, b.load)
    pd.testing.assert_frame_equal(a.weather, b.weather)
    pd.testing.assert_frame_equal(a.lmp_rt, b.lmp_rt)


def test_seed_changes_data():
    a = generate(SynthSettings(seed=4, days=20))
    b = generate(SynthSettings(seed=5, days=20))
    assert not np.allclose(a.load["load_mw"], b.load["load_mw"])


def test_shapes_and_ids():
    dataset = generate(SynthSettings(seed=0, days=10))
    assert len(dataset.load) == 240
    assert len(dataset.lmp_da) == 480
    assert len(dataset.lmp_rt) == 240 * 12
    assert set(dataset.sld_fcst["MARKET_RUN_ID"]) == {"ACTUAL", "DAM"}
    assert dataset.load_series().id == "SYN:load"
    assert dataset.weather_series("temperature").id == "SYN:temperature"


def test_flat_profile_is_constant():
    dataset = generate(SynthSettings(seed=0, days=10, profile="flat"))
    assert dataset.load["load_mw"].nunique() == 1
    assert dataset.weather["temp_c"].nunique() == 1
    with pytest.raises(ConstantSeries):
        lag_scan(dataset.weather_series("temperature"), dataset.load_series())


def test_heatwave_only_adds_heat():
    duck = generate(SynthSettings(seed=2, days=120, profile="duck")).weather["temp_c"].to_numpy()
    heat = generate(SynthSettings(seed=2, days=120, profile="heatwave")).weather["temp_c"].to_numpy()
    assert (heat >= duck - 1e-9).all()
    assert heat.max() > duck.max()


def test_daily_load_cycle_peaks_in_local_evening(duck_dataset):
    load = duck_dataset.load_series().to_series()
    by_hour = load.groupby((load.index.hour - 8) % 24).mean()
    assert 14 <= int(by_hour.idxmax()) <= 21
    assert int(by_hour.idxmin()) <= 8


def test_written_files_ingest_back(duck_dir, duck_dataset):
    [load] = ingest_csv(str(duck_dir / "load.csv"), "load")
    assert load.id == "SYN:load"
    np.testing.assert_allclose(load.values, duck_dataset.load["load_mw"], atol=1e-3)

    weather = {s.channel_kind.value: s for s in ingest_csv(str(duck_dir / "weather.csv"), "weather")}
    assert {"temperature", "ghi", "humidity", "wind_speed"} <= set(weather)

    [da] = ingest_csv(str(duck_dir / "lmp_da.csv"), "lmp_oasis")
    assert da.id == "SYN_NODE:lmp_da"
    lmp_rows = duck_dataset.lmp_da[duck_dataset.lmp_da["LMP_TYPE"] == "LMP"]
    np.testing.assert_allclose(da.values, lmp_rows["MW"], atol=1e-3)

    [rt] = ingest_csv(str(duck_dir / "lmp_rt.csv"), "lmp_oasis")
    assert rt.id == "SYN_NODE:lmp_rt"
    assert len(rt) == len(da)

    sld = ingest_csv(str(duck_dir / "sld_fcst.csv"), "lmp_oasis")
    assert [s.id for s in sld] == ["SYN-TAC:load_actual", "SYN-TAC:load_dam"]


@pytest.mark.parametrize("kwargs", [{"profile": "spiky"}, {"days": 0}, {"temperature_lag": 13}])
def test_invalid_settings(kwargs):
    with pytest.raises(ConfigError):
        SynthSettings(**kwargs)
