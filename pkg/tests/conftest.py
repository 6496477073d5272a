"""Shared fixtures; collects acceptance-criterion verdict lines."""

import pytest

_acceptance_lines: list[str] = []


@pytest.fixture
def acceptance():
    """Record and assert one PASS/FAIL line for an acceptance criterion."""

    def check(number: int, description: str, problems: list[str]):
        verdict = "PASS" if not problems else "FAIL"
        line = f"[ACCEPTANCE {number}] {verdict} - {description}"
        _acceptance_lines.append(line)
        print(line)
        assert not problems, f"{line}\n  " + "\n  ".join(problems)

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)
