from __future__ import annotations

import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kuramoto_continuum.characteristics import SolverConfig, evolve
from kuramoto_continuum.density import make_cosine_family, make_fourier

settings.register_profile("repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

SNAPSHOT_TIMES = (0.0, 1.0, 2.0, 5.0, 10.0)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.fixture(scope="session")
def cosine():
    return make_cosine_family(0.0, 0.5)


@pytest.fixture(scope="session")
def mixture():
    return make_fourier([[0.4, 1, 0.0], [0.2, 2, 1.0]])


@pytest.fixture(scope="session")
def run10(cosine):
    """Cosine family, k=1, N=M=256, dt=1e-3 over [0, 10], full history."""
    cfg = SolverConfig(k=1.0, T=10.0, dt=1e-3, N=256, M=256, output_times=SNAPSHOT_TIMES)
    return evolve(cosine, cfg, history_stride=1)


@pytest.fixture(scope="session")
def run20(cosine):
    cfg = SolverConfig(k=1.0, T=20.0, dt=1e-3, N=256, M=256)
    return evolve(cosine, cfg, history_stride=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance summary ---------------------------------------------------------

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.outcome == "passed" else "FAIL"
        prev = _ACCEPTANCE.get(number)
        if prev is None or prev[0] == "PASS":
            _ACCEPTANCE[number] = (status, title)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")
    passed = sum(1 for s, _ in _ACCEPTANCE.values() if s == "PASS")
    terminalreporter.write_line(f"{passed}/{len(_ACCEPTANCE)} criteria pass")
