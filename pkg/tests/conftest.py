import pytest

from qdshuttle.array import ArrayConfig, Dot, build_standard_array
from qdshuttle.machine import MachineState

_criteria: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "ok": True, "details": []})
    if report.failed:
        entry["ok"] = False
    if report.when == "call":
        entry["details"].extend(v for k, v in item.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "PASS" if entry["ok"] else "FAIL"
        detail = "; ".join(entry["details"])
        terminalreporter.write_line(f"{status} criterion {number:>2}: {entry['title']}" + (f" [{detail}]" if detail else ""))


@pytest.fixture(scope="session")
def std():
    return build_standard_array()


@pytest.fixture(scope="session")
def small():
    return build_standard_array(5, 6, 3)


def place(config: ArrayConfig, *dots) -> MachineState:
    """State with electron i on ``dots[i]``."""
    return MachineState(config, {i: Dot(*d) for i, d in enumerate(dots)})
