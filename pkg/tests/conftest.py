import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from modwave.criticality import find_double_critical  # noqa: E402
from modwave.fixtures import load_fixture  # noqa: E402

SQ3 = np.sqrt(3.0)
SW_SLICE = np.array([(SQ3 - 1) / 2, np.sqrt(5.0), np.sqrt(5 * (2 - SQ3))])


@pytest.fixture(scope="session")
def sw_fixture():
    return load_fixture("sw")


@pytest.fixture(scope="session")
def nls_fixture():
    return load_fixture("cnls")


@pytest.fixture(scope="session")
def sw_cp(sw_fixture):
    f = sw_fixture
    return find_double_critical(f.model, f.fixed_state, f.guess, f.pin)


@pytest.fixture(scope="session")
def nls_cp(nls_fixture):
    f = nls_fixture
    return find_double_critical(f.model, f.fixed_state, f.guess, f.pin)


@pytest.fixture(scope="session")
def sw_point():
    """Model and point at the exact shallow-water fixture."""
    from modwave.models import ShallowWaterModel, SWParams

    m = ShallowWaterModel(SWParams(r=SW_SLICE[0]))
    return m, m.point_from_state([10.0, 5.0], SW_SLICE[1:])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
