import re

import pytest

_CRITERIA: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Recorder for acceptance criteria: ``criterion(passed, detail)``.

    The number and title come from the test name ``test_cNN_title``.  A test
    that raises before recording is logged as a failure.
    """
    m = re.match(r"test_c(\d+)_(\w+)", request.node.name)
    number, title = int(m.group(1)), m.group(2).replace("_", " ")

    def record(passed: bool, detail: str = ""):
        _CRITERIA[number] = (title, bool(passed), detail)
        print(f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}")

    yield record
    if number not in _CRITERIA:
        _CRITERIA[number] = (title, False, "raised before reporting")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
