import numpy as np
import pytest

from bcfbench.bath import BathSpec, OhmicExp
from bcfbench.fitting import esprit_fit, time_grid
from bcfbench.oscillator import OscillatorParams


@pytest.fixture(scope="session")
def ohmic_bath():
    return BathSpec(OhmicExp(1.0, 1.0, 5.0), beta=1.0)


@pytest.fixture(scope="session")
def ohmic_model(ohmic_bath):
    return esprit_fit(time_grid(ohmic_bath, 0.01, 20.0), 14)


@pytest.fixture(scope="session")
def unit_osc():
    return OscillatorParams(1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
