import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from xlingcite.registry import default_registry  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def reg():
    return default_registry()


@pytest.fixture
def data_dir():
    return DATA


# acceptance criterion number -> list of (test name, passed)
_CRITERIA: dict[int, list[tuple[str, bool]]] = {}
CRITERION_TITLES = {
    1: "regex conformance vs golden file and reference scanner",
    2: "detection precision and recall on generated corpus",
    3: "prevalence and unmarked-rate arithmetic from reference counts",
    4: "cross-linguality mean and SD",
    5: "geographic matrix properties",
    6: "strict self-citation never exceeds loose",
    7: "stratified sampler histogram",
    8: "citation context sets vs brute-force oracle",
    9: "title resolution",
    10: "preprint/published pair diffs",
    11: "label distribution reporting",
    12: "determinism and scanning throughput",
}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _CRITERIA.setdefault(marker.args[0], []).append((item.name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERION_TITLES):
        results = _CRITERIA.get(n)
        if results is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(ok for _, ok in results) else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {CRITERION_TITLES[n]}")
