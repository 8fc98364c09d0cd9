_criteria = []


def pytest_runtest_logreport(report):
    if report.when == "call":
        _criteria.extend(line for line in report.capstdout.splitlines()
                         if line.startswith("[criterion"))


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criteria):
            terminalreporter.write_line(line)
