import pytest

from rabisense.core.dynamics import InterferometerParams
from rabisense.core.spin_states import make_css, moments
from rabisense.utils.constants import DEFAULT_DELTA_RATE, DEFAULT_EJ_RATE, DEFAULT_NUM_PARTICLES


@pytest.fixture
def params() -> InterferometerParams:
    return InterferometerParams(DEFAULT_EJ_RATE, DEFAULT_DELTA_RATE)


@pytest.fixture(scope="session")
def css_moments():
    return moments(make_css(DEFAULT_NUM_PARTICLES))
