import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bidisk_realize.fixtures import kummert_example

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fx():
    return kummert_example()


def disk_points(n, seed=0, radius=0.9):
    rng = np.random.default_rng(seed)
    return radius * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))


def circle_points(n, phase=0.013):
    return np.exp(2j * np.pi * (np.arange(n) / n + phase))


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
