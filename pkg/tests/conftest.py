from pathlib import Path

import pytest

from ftqbudget.budgets import normalize
from ftqbudget.circuits import LogicalCounts

FIXTURES = Path(__file__).parent / "fixtures"


def simplex_grid(total, step_count=20):
    """All strictly positive (i, j, k)/step_count grid distributions."""
    points = []
    for i in range(1, step_count - 1):
        for j in range(1, step_count - i):
            k = step_count - i - j
            if k >= 1:
                points.append(normalize((i, j, k), total))
    return points


@pytest.fixture
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture
def three_qubit_rx_source() -> str:
    return (FIXTURES / "three_qubit_rx.qasm").read_text(encoding="utf-8")


@pytest.fixture
def three_qubit_rx_counts() -> LogicalCounts:
    """Logical counts of the three-qubit rotation fixture circuit."""
    return LogicalCounts(
        qubits=3,
        t_count=0,
        rotation_count=5,
        rotation_depth=3,
        toffoli_count=0,
        measurement_count=3,
    )


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\n[acceptance] {name}: {report.outcome.upper()}", flush=True)
