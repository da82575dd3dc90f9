import pytest

_LINES: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def acceptance(request):
    """record(passed, detail) stores the summary line of the calling criterion."""
    number, title = request.node.get_closest_marker("criterion").args

    def record(passed: bool, detail: str) -> bool:
        _LINES[number] = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        return passed

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    if report.failed and not _LINES.get(number, "").startswith(f"criterion {number:2d} FAIL"):
        reason = str(call.excinfo.value).splitlines()[0] if call.excinfo else "failed"
        _LINES[number] = f"criterion {number:2d} FAIL  {title}: {reason}"


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_LINES):
            terminalreporter.write_line(_LINES[k])
