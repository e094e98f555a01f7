import os

import pytest

from rtosmc.matrix import run_matrix
from rtosmc.model import make_config

ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def worker_count() -> int:
    return max(2, min(4, os.cpu_count() or 1))


@pytest.fixture(scope="session")
def trace_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("traces")


@pytest.fixture(scope="session")
def matrix_report(trace_dir):
    """Full default matrix: one worker, forward order, invariants checked on every state."""
    return run_matrix(make_config(), workers=1, check_invariants=True, trace_dir=str(trace_dir))


@pytest.fixture(scope="session")
def reverse_report():
    """Same matrix with several workers and successors explored in reverse."""
    return run_matrix(make_config(), workers=worker_count(), reverse=True,
                      check_invariants=False)
