import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from megflood import kernels_numpy  # noqa: E402
from megflood._accel import HAS_NUMBA  # noqa: E402

ACCEPTANCE_LINES = []


def _backends():
    mods = [pytest.param(kernels_numpy, id="numpy")]
    if HAS_NUMBA:
        from megflood import kernels_numba
        mods.append(pytest.param(kernels_numba, id="numba"))
    return mods


@pytest.fixture(params=_backends())
def kern(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
