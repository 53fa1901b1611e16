import numpy as np
import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion gate")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "passed": True, "details": []})
    entry["passed"] = entry["passed"] and rep.passed
    details = [v for k, v in item.user_properties if k == "detail"]
    if rep.failed and not details:
        details = [str(rep.longrepr.reprcrash.message) if hasattr(rep.longrepr, "reprcrash") else "failed"]
    entry["details"].extend(details)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["passed"] else "FAIL"
        detail = "; ".join(entry["details"])
        terminalreporter.write_line(f"[{status}] criterion {number}: {entry['title']} -- {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
