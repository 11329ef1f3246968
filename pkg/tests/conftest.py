"""Collects acceptance results and prints one PASS/FAIL line per criterion."""

import re

_results: dict[int, tuple[str, str, str]] = {}
_PATTERN = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    num, name = int(m.group(1)), m.group(2)
    failed = report.failed
    if report.when == "call" or failed:
        detail = "; ".join(str(v) for k, v in report.user_properties if k == "detail")
        prev = _results.get(num)
        if prev is None or prev[0] == "PASS":
            _results[num] = ("FAIL" if failed else "PASS", name, detail)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        status, name, detail = _results[num]
        line = f"criterion {num:2d} {status}  {name}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
