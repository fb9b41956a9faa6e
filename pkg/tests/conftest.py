import os

import pytest
from hypothesis import settings

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repro"))

# keep MC runs reproducible and bounded on shared machines
os.environ.setdefault("GFBM_THREADS", "4")

_ACCEPTANCE: list[str] = []


@pytest.fixture
def verdict():
    """Record one pass/fail line per acceptance criterion."""
    lines = []

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        lines.append(line)
        _ACCEPTANCE.append(line)
        print(line)

    yield record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
