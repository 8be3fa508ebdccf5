import numpy as np
import pytest

from quadpoints.trigpoly import TrigPoly2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def example_c():
    """cos(2u - v) + 0.1 cos(2u - 2v)."""
    return TrigPoly2.cos(2, -1) + TrigPoly2.cos(2, -2, 0.1)


def random_poly(rng, N, M, scale=1.0):
    """Random real polynomial of bidegree (N, M) with coefficients in [-scale, scale]."""
    c = {}
    for n in range(0, N + 1):
        for m in range(-M, M + 1):
            if n == 0 and m < 0:
                continue
            c[(n, m)] = complex(*rng.uniform(-scale, scale, 2)) if (n, m) != (0, 0) \
                else rng.uniform(-scale, scale)
    return TrigPoly2(c)


# one PASS/FAIL line per acceptance criterion, printed after the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, label, seconds = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {label}  ({seconds:.2f} s)")
