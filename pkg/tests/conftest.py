import numpy as np
import pytest

# 16-element fixture used throughout the examples
FIXTURE = [3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3]


def brute_min(values, l, r):
    """Independent oracle: plain Python min over the slice."""
    return min(int(v) for v in values[l:r + 1])


def all_pairs(n):
    ls, rs = np.triu_indices(n)
    return ls.astype(np.int64), rs.astype(np.int64)


@pytest.fixture
def fixture_array():
    return np.array(FIXTURE, dtype=np.uint32)


_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion and return the verdict."""

    def _report(criterion, passed, detail=""):
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}".rstrip()
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
