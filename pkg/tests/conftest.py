import math

import pytest

from powext.gumbel import moment_table


@pytest.fixture(scope="session")
def table():
    return moment_table(16)


def bisect(f, lo, hi, iters=200):
    """Plain bisection for an increasing ``f``; used as an independent root oracle."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.fixture
def bisect_root():
    return bisect


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
