import sys
from pathlib import Path

import numpy as np
import pytest

TESTS = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS))

FIXTURES = TESTS.parent / "fixtures" / "worked"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


# Example 1: two defective 2x2 Jordan blocks (eigenvalues 1 and -1) plus a simple zero.
EX1_A = np.array([[-1, 0, 0, 0, 1], [0, 1, 0, 0, 0], [0, 1, 1, 0, 0], [0, 0, 0, 0, 0], [0, 0, 0, 0, -1]], float)
EX1_C = np.array([[0, 1, 0, 1, 1]], float)
EX1_F = np.array([[1, 1, 0, 0, 0]], float)
EX1_T = np.eye(5)[:, [2, 1, 0, 4, 3]]
EX1_JORDAN = [
    (np.array([[1.0, 1], [0, 1]]), EX1_T[:, 0:2]),
    (np.array([[-1.0, 1], [0, -1]]), EX1_T[:, 2:4]),
    (np.array([[0.0]]), EX1_T[:, 4:5]),
]

EX2_A = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], float)
EX2_C = np.array([[0, 0, 1]], float)
EX2_F = np.array([[0, 1, 0]], float)

EX3_A = np.array([[0, 0, 0], [1, 0, 0], [0, 0, 0]], bool)
EX3_C = np.array([[0, 1, 1]], bool)
EX3_F = np.array([[0, 1, 0]], bool)

EX4_EDGES = [(0, 1), (1, 2), (2, 3), (3, 4), (1, 5), (5, 6)]
EX4_A = np.zeros((7, 7), bool)
for _i, _j in EX4_EDGES:
    EX4_A[_i, _j] = True
EX4_C = np.zeros((1, 7), bool)
EX4_C[0, 0] = True

EIGHT_A = np.array([
    [0, 4, 3, -2, -3, 0, -4, 1],
    [-1, -1, -1, 1, 0, 3, 1, 4],
    [2, 10, 1, -3, -3, 3, -3, 5],
    [-1, 9, 1, -2, -3, 9, -1, 13],
    [0, 0, 0, 0, 1, 1, 0, 0],
    [0, 0, 0, 0, -1, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, 1],
    [0, 0, 0, 0, 0, 0, -1, 1],
], float)
EIGHT_F = np.hstack([np.eye(4), np.zeros((4, 4))])
EIGHT_REF_C = np.array([[0, -3, 0, 1, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0, 0, 0]], float)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
