from __future__ import annotations

from pathlib import Path

import pytest

from cgrobust import fixtures

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def v1():
    return fixtures.load("picture-v1")


@pytest.fixture(scope="session")
def v2():
    return fixtures.load("picture-v2")


@pytest.fixture(scope="session")
def picture_paths():
    return str(fixtures.path("picture-v1")), str(fixtures.path("picture-v2"))


_ACCEPTANCE: list[tuple[int, str, str, float]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion of the build")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is not None and report.when == "call":
        number, title = marker.args
        _ACCEPTANCE.append((number, title, report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, title, outcome, duration in sorted(_ACCEPTANCE):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {number}. {title} ({duration:.2f}s)")
