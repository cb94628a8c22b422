import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report_line():
    """Record a criterion's PASS/FAIL line; all lines are repeated in the terminal summary."""

    def emit(line):
        print(line)
        _ACCEPTANCE_LINES.append(line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_density(rng, dim, support=6, rank=2):
    """Mixed state on the lowest ``support`` Fock levels, embedded in ``dim``."""
    vecs = rng.normal(size=(support, rank)) + 1j * rng.normal(size=(support, rank))
    small = vecs @ vecs.conj().T
    rho = np.zeros((dim, dim), dtype=complex)
    rho[:support, :support] = small / np.trace(small).real
    return rho
