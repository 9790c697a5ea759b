import pytest

_criteria: dict[int, str] = {}


@pytest.fixture
def criterion():
    def report(number: int, text: str, ok: bool) -> bool:
        line = f"criterion {number}: {text}: {'PASS' if ok else 'FAIL'}"
        _criteria[number] = line
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_criteria):
            terminalreporter.write_line(_criteria[n])
