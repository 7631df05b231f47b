import _report


def pytest_terminal_summary(terminalreporter):
    if not _report.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_report.RESULTS):
        terminalreporter.write_line(_report.RESULTS[n])
