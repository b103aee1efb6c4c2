import numpy as np
import pytest

_acceptance_results = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240715)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        _acceptance_results.append((number, title, report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, duration in sorted(_acceptance_results):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"AC{number:02d} {status}  {title}  ({duration:.2f}s)")
