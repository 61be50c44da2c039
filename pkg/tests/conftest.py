import numpy as np
import pytest

from sgmc.construction import nu_profile, sample_generator


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def code16():
    """A fixed random [16, 8] staircase code."""
    return sample_generator(nu_profile(16, 8, 4), 1)


def gf2_matmul(a, b):
    """Dense GF(2) product used as an independent oracle."""
    return (np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64)) % 2


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
