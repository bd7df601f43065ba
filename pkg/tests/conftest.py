import pytest

_VERDICTS: dict[int, tuple[bool, str]] = {}


class Recorder:
    def __call__(self, number: int, passed: bool, detail: str) -> bool:
        _VERDICTS[number] = (bool(passed), detail)
        return passed


@pytest.fixture(scope="session")
def record():
    """Store one pass/fail line per acceptance criterion for the summary."""
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        passed, detail = _VERDICTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
