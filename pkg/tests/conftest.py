import math

import numpy as np
import pytest

from bellext.sampling import DEFAULT_SEED
from bellext.scenarios import build_ghsz_model, build_ghsz_scenario, build_hardy_scenario, build_singlet_scenario

SQRT2 = math.sqrt(2.0)
C_PLUS = 0.25 + SQRT2 / 8
C_MINUS = 0.25 - SQRT2 / 8


@pytest.fixture
def rng():
    return np.random.default_rng(DEFAULT_SEED)


@pytest.fixture(scope="session")
def singlet():
    return build_singlet_scenario()


@pytest.fixture(scope="session")
def hardy():
    return build_hardy_scenario()


@pytest.fixture(scope="session")
def ghsz():
    return build_ghsz_scenario()


@pytest.fixture(scope="session")
def model1():
    return build_ghsz_model(1)


@pytest.fixture(scope="session")
def model2():
    return build_ghsz_model(2)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
