import numpy as np
import pytest

from superfem.identities import random_triangles

REFERENCE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
EQUILATERAL = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]])

# skewed benchmark domains with vertices rounded to 4 decimals
SKEWED_P2 = [(0.0, 0.0), (1.1462, 0.9042), (0.6941, 2.2924), (-0.4521, 1.3882)]
SKEWED_P3_TRIANGLE = [(0.0, 0.0), (0.7917, 0.7672), (1.1238, 1.8184)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def triangles(rng):
    return random_triangles(rng, 100)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record_criterion():
    """Record one PASS/FAIL line for the acceptance summary printed at the end of the run."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> bool:
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
