"""Shared pytest wiring: the acceptance verdict summary section."""

verdict_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if verdict_lines:
        terminalreporter.section("acceptance verdicts")
        for line in verdict_lines:
            terminalreporter.write_line(line)
