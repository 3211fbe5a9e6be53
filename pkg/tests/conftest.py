"""Test configuration: the ``slow`` marker and the acceptance summary.

Acceptance tests are named ``test_criterion_<n>_...``; after the run one
PASS/FAIL line per criterion is printed, failing a criterion if any of
its tests failed.
"""

from __future__ import annotations

import re

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_results: dict[int, list[bool]] = {}
_details: dict[int, list[str]] = {}


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", help="also run tests marked slow")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running sweep, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow sweep; use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or report.failed:
        if report.skipped:
            return
        _results.setdefault(n, []).append(report.passed)


@pytest.fixture
def detail(request):
    """Record a one-line summary for the current criterion."""
    m = _CRITERION.search(request.node.name)

    def add(text: str):
        if m:
            _details.setdefault(int(m.group(1)), []).append(text)

    return add


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        ok = all(_results[n])
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}"
        if _details.get(n):
            line += "  (" + "; ".join(_details[n]) + ")"
        terminalreporter.write_line(line)
