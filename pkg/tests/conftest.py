import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dgch.kato import SampleSpec, random_coefficients, synthesize
from dgch.operators import ModelParams, operator_from_name
from dgch.spectral import make_grid

settings.register_profile(
    "dgch", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("dgch")


def band_limited(grid, seed=0, band=16, decay=2.0):
    """One random real field with modes 0..band."""
    spec = SampleSpec(count=1, band=band, decay=decay, seed=seed)
    return synthesize(grid, random_coefficients(spec, spec.rng(99)))


@pytest.fixture
def g64():
    return make_grid(64)


@pytest.fixture
def g128():
    return make_grid(128)


@pytest.fixture
def ch():
    return ModelParams(2.0, 1.0, operator_from_name("identity"))


def params_for(name, a=2.0, b=1.0):
    return ModelParams(a, b, operator_from_name(name))


def x_of(grid):
    return grid.nodes


def maxabs(v):
    return float(np.max(np.abs(v)))


# acceptance lines, filled by test_acceptance.py and echoed after the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
