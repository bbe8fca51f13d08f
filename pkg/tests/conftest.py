import pytest

_criteria: dict = {}


def pytest_runtest_logreport(report):
    label = dict(report.user_properties).get("criterion")
    if label is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[label] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=lambda s: int(s.split()[0])):
        terminalreporter.write_line(f"{_criteria[label]}  criterion {label}")


@pytest.fixture
def criterion(record_property):
    """Tag a test as an acceptance criterion so the summary lists it."""

    def tag(label: str) -> None:
        record_property("criterion", label)

    return tag
