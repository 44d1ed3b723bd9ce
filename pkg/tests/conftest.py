import pytest

_ACCEPTANCE: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call":
        for key, line in report.user_properties:
            if key == "acceptance":
                _ACCEPTANCE.append((report.nodeid, line))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(_ACCEPTANCE, key=lambda t: t[1]):
        terminalreporter.write_line(line)


@pytest.fixture
def acceptance_line(record_property):
    return lambda line: record_property("acceptance", line)
