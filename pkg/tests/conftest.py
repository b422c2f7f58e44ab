import os

import pytest

_outcomes: dict[int, list[str]] = {}


def pytest_collection_modifyitems(config, items):
    if os.environ.get("BELLFORGE_LONG") == "1":
        return
    skip = pytest.mark.skip(reason="set BELLFORGE_LONG=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    report = (yield).get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n = mark.args[0]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes.setdefault(n, []).append("skipped" if report.skipped else report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        results = _outcomes[n]
        ran = [r for r in results if r != "skipped"]
        if not ran:
            verdict = "SKIP"
        else:
            verdict = "PASS" if all(r == "passed" for r in ran) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}")
