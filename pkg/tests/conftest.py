import numpy as np
import pytest

from src.synth.generator import SynthSettings, generate


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def duck_dataset():
    return generate(SynthSettings(seed=0, days=400, profile="duck"))


@pytest.fixture(scope="session")
def duck_dir(tmp_path_factory, duck_dataset):
    out = tmp_path_factory.mktemp("synth")
    duck_dataset.write(str(out))
    return out
