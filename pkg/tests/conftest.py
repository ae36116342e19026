import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from optomech import SystemParams

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_system(**kw):
    """Small resolved-sideband system in convenient units (Omega_M = 1)."""
    base = dict(
        mass=1e-11,
        mech_freq=1.0,
        mech_Q=1e3,
        temperature=0.0,
        cavity_decay=0.3,
        cavity_length=1e-3,
        wavelength=1e-6,
        input_power=0.0,
        detuning=1.0,
        coupling=0.1,
    )
    base.update(kw)
    return SystemParams(**base)


@pytest.fixture
def system():
    return make_system


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
