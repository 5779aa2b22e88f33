import pytest

from fwm_biphoton.modes import BeamGeometry
from fwm_biphoton.pump import PumpSpec

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def beam():
    return BeamGeometry(1e-3)


@pytest.fixture
def gaussian_pump(beam):
    return PumpSpec.gaussian(beam)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
