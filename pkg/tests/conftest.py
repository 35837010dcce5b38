import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from euler3body import MassTriple, circle_loop, geometry_for

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# Collinear ratio for masses (1, 2, 3) from an independent oracle: a sign-change
# scan of the ratio equation on 10**6 uniform points of (0, 1) followed by
# bisection to 1e-16, confirmed with 40-digit mpmath root finding
# (0.47142566019038275849...).
LAMBDA0_123 = 0.4714256601903827


@pytest.fixture(scope="session")
def equal():
    m = MassTriple(1.0, 1.0, 1.0)
    return m, geometry_for(m)


@pytest.fixture(scope="session")
def m123():
    m = MassTriple(1.0, 2.0, 3.0)
    return m, geometry_for(m)


@pytest.fixture(scope="session")
def circular_orbit():
    """Equal masses, |r| = 1 with angular frequency sqrt(10): an exact Euler orbit."""
    return circle_loop(1.0, T=2 * np.pi / np.sqrt(10.0))


ACCEPTANCE = pytest.StashKey[list]()


class _Criterion:
    def __init__(self, lines, label):
        self.lines, self.label, self.detail = lines, label, ""

    def note(self, text):
        self.detail = text

    def __enter__(self):
        return self

    def __exit__(self, kind, exc, tb):
        verdict = "PASS" if kind is None else "FAIL"
        self.lines.append(f"{verdict}  {self.label}" + (f"  [{self.detail}]" if self.detail else ""))
        return False


@pytest.fixture
def criterion(request):
    """``with criterion("AC5 ..") as c:`` records one PASS/FAIL acceptance line."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])
    return lambda label: _Criterion(lines, label)


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("AC")[1].split()[0].rstrip(":"))):
            terminalreporter.write_line(line)
