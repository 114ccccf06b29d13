import numpy as np
import pytest

from telesim.params import HumanParams, RobotParams, SupportPolygon, load_profile

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def human() -> HumanParams:
    return HumanParams(m_body=52.0, h_com=1.10)


@pytest.fixture
def robot() -> RobotParams:
    return RobotParams(m_body=12.6, m_base=1.61, h_com=0.37)


@pytest.fixture
def polygon() -> SupportPolygon:
    return SupportPolygon(p_min=-0.05, p_max=0.15)


@pytest.fixture
def default_profile():
    return load_profile(None)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
