"""Aggregates tests marked ``criterion(n)`` into one PASS/FAIL line each."""
import pytest

CRITERIA = {
    1: "oracle equivalence",
    2: "unitarity and rotations",
    3: "Wigner identities",
    4: "single-kick Wigner pictures",
    5: "classical skeleton",
    6: "purity orderings",
    7: "classical web and energy growth",
    8: "optical design formulas",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes.setdefault(marker.args[0], []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        results = _outcomes.get(n)
        if results is None:
            continue
        status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"{status} criterion {n}: {title} "
                                    f"({sum(results)}/{len(results)} checks)")
