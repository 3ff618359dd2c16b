import sys
import time
from pathlib import Path

import pytest
from hypothesis import settings as hyp_settings

sys.path.insert(0, str(Path(__file__).parent))

# reproducible property tests
hyp_settings.register_profile("ci", derandomize=True)
hyp_settings.load_profile("ci")

from ptgpe import SolverSettings, SystemParams, compute_spectrum, validate  # noqa: E402

A = 2.2
GAMMA_MAX = 0.6

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES = {}


def _spectrum(g, continued=True):
    params, settings = validate(SystemParams(A, 0.0, g), SolverSettings())
    t0 = time.perf_counter()
    scan = compute_spectrum(params, 0.0, GAMMA_MAX, settings, continued=continued)
    scan.info["elapsed"] = time.perf_counter() - t0
    return scan


@pytest.fixture(scope="session")
def settings():
    return validate(SystemParams(A, 0.0, 1.0), SolverSettings())[1]


@pytest.fixture(scope="session")
def spectrum_attractive():
    return _spectrum(1.0)


@pytest.fixture(scope="session")
def spectrum_repulsive():
    return _spectrum(-1.0)


@pytest.fixture(scope="session")
def spectrum_linear():
    return _spectrum(0.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
