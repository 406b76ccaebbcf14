"""Per-criterion acceptance summary.

Tests marked ``@pytest.mark.acceptance(n, "title")`` are grouped by ``n``; after
the run one PASS/FAIL line per criterion is printed, naming failing sub-items.
"""

from collections import defaultdict

import pytest

_RESULTS = defaultdict(list)
_TITLES = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    _TITLES[number] = title
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _RESULTS[number].append((item.name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        results = _RESULTS[number]
        failed = [name for name, ok in results if not ok]
        status = "FAIL" if failed else "PASS"
        line = f"{status}  criterion {number}: {_TITLES[number]} ({len(results) - len(failed)}/{len(results)})"
        tr.write_line(line, red=bool(failed), green=not failed)
        for name in failed:
            tr.write_line(f"        failed: {name}")
