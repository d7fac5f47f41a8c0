import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

import pytest

_ACCEPTANCE = {}


class AcceptanceRecorder:
    """Collects one verdict per acceptance criterion plus detail lines."""

    def __init__(self, store):
        self.store = store

    def record(self, number: int, title: str, passed: bool, details=()):
        self.store[number] = (title, bool(passed), list(details))
        line = f"CRITERION {number:2d} {'PASS' if passed else 'FAIL'}  {title}"
        print(line)
        for d in details:
            print(f"    {d}")


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceRecorder(_ACCEPTANCE)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, details = _ACCEPTANCE[number]
        terminalreporter.write_line(f"CRITERION {number:2d} {'PASS' if passed else 'FAIL'}  {title}")
        for d in details:
            terminalreporter.write_line(f"    {d}")
