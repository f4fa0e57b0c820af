import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None)
settings.load_profile("default")

from gaugecantor.gauge import GaugeSpec, derive_schedule  # noqa: E402


@pytest.fixture(scope="session")
def linear():
    """phi(r) = r, deep enough for every experiment in the suite."""
    return derive_schedule(GaugeSpec.power(1), 256)


@pytest.fixture(scope="session")
def square_gauge():
    return derive_schedule(GaugeSpec.power(2), 32)


_results = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "acceptance" in report.keywords:
        _results.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _results:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
