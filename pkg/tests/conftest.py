import pytest

_results: dict[str, list[bool]] = {}
_titles: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call" and not (call.when == "setup" and call.excinfo):
        return
    number, title = mark.args
    _titles[number] = title
    _results.setdefault(number, []).append(call.excinfo is None)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results, key=int):
        status = "PASS" if all(_results[number]) else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {_titles[number]}")
