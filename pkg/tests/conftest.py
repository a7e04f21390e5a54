VERDICTS: list = []


def pytest_terminal_summary(terminalreporter):
    """Print one verdict line per acceptance criterion after the test run."""
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in VERDICTS:
        terminalreporter.write_line(line)
