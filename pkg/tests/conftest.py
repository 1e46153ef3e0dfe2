"""Acceptance bookkeeping: tests marked ``criterion(n, title)`` are collected
into one PASS/FAIL line per criterion at the end of the run."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_RESULTS: dict = {}  # n -> [title, ok]
_DETAILS: dict = {}  # n -> list of detail strings


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.fixture
def detail(request):
    """Attach a short note (counts, timings) to the criterion's summary line."""
    marker = request.node.get_closest_marker("criterion")

    def put(text: str):
        _DETAILS.setdefault(marker.args[0], []).append(text)

    return put


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n, title = marker.args
    entry = _RESULTS.setdefault(n, [title, True])
    if rep.failed or rep.skipped or (rep.when == "call" and not rep.passed):
        entry[1] = False


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        title, ok = _RESULTS[n]
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}"
        if n in _DETAILS:
            line += "  (" + "; ".join(_DETAILS[n]) + ")"
        terminalreporter.write_line(line)
