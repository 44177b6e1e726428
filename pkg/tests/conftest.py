import math

import numpy as np
import pytest

from wcl.funcspace import C0Tolerance
from wcl.space import Space, make_interval_space


@pytest.fixture
def tol():
    return C0Tolerance.discrete()


@pytest.fixture
def ctol():
    return C0Tolerance.continuum()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def halfline():
    """[0, +∞) truncated at R = 20 with n = 400 steps."""
    return make_interval_space(0.0, math.inf, 400, ("+∞",), truncate=20.0)


@pytest.fixture(scope="session")
def line():
    return make_interval_space(-math.inf, math.inf, 400, ("+∞", "−∞"), truncate=20.0)


def tiny_space(n):
    """Compact space of n equally spaced samples (no n >= 8 restriction)."""
    return Space(np.arange(n, dtype=float), 1.0, (np.arange(n),), True)


# -- acceptance summary ------------------------------------------------------

_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: criterion(n, passed, detail)."""

    def record(n, passed, detail):
        _ACCEPTANCE[n] = (bool(passed), detail)
        print(f"criterion {n}: {'PASS' if passed else 'FAIL'}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE, key=str):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
