import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hypothesis import settings  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_REPORT = []


@pytest.fixture(scope="session")
def criterion_report():
    """Collects one 'criterion N: PASS/FAIL ...' line per acceptance criterion."""
    return _REPORT


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_REPORT, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


#: wall time of the 2^34 scan, filled in by the fixture
SCAN_SECONDS = {}


@pytest.fixture(scope="session")
def scan_2_34():
    """Gap tables at 2^15 .. 2^34 (about 40 s)."""
    import time

    from primespec.gapstats import scan_gaps

    t = time.perf_counter()
    series = scan_gaps(2**34, [2**k for k in range(15, 35)])
    SCAN_SECONDS["2^34"] = time.perf_counter() - t
    return series
