import numpy as np
import pytest

from pqdm.rng import SplitMix64

CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return SplitMix64(20240601)


@pytest.fixture
def np_rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        ok, text = CRITERIA[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num}: {text}")
