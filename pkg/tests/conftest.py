"""Per-criterion pass/fail lines for the acceptance suite."""

from __future__ import annotations

import pytest

_OUTCOMES: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test establishes")


def pytest_collection_modifyitems(config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            entry = _OUTCOMES.setdefault(number, {"title": title, "results": []})
            entry.setdefault("expected", 0)
            entry["expected"] += 1


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    entry = _OUTCOMES[mark.args[0]]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        entry["results"].append("skipped" if report.skipped else ("passed" if report.passed else "failed"))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        entry = _OUTCOMES[number]
        results = entry["results"]
        if not results:
            status = "NOT RUN"
        elif "failed" in results:
            status = "FAIL"
        elif all(r == "skipped" for r in results):
            status = "SKIP"
        else:
            status = "PASS"
        terminalreporter.write_line(f"criterion {number}: {status}  {entry['title']}")
