import numpy as np
import pytest

from tkaczmarz import kernels

BACKENDS = ["numpy"] + (["numba"] if kernels.NUMBA is not None else [])

# lines collected by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
