import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def record(request):
    """Log one pass/fail line for an acceptance criterion."""
    def _record(number, ok, detail):
        status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        line = f"[{status}] criterion {number}: {detail}"
        request.config._acceptance_lines.append(line)
        print(line)
        return ok
    return _record


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
