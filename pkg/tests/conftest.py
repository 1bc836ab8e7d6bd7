import pytest

_ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record an acceptance-criterion outcome; printed in the terminal
    summary so each criterion gets one visible pass/fail line."""

    def record(name: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE_RESULTS.append((name, passed, detail))
        line = f"[{name}] {'PASS' if passed else 'FAIL'}" + (f" - {detail}" if detail else "")
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, passed, detail in _ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        line = f"[{name}] {status}" + (f" - {detail}" if detail else "")
        terminalreporter.write_line(line)
