import json
from pathlib import Path

import numpy as np
import pytest

from leximin_approx.allocation import AllocationInstance, ValueOracle
from leximin_approx.io import instance_from_json
from leximin_approx.programs import MultiObjectiveProblem

DATA = Path(__file__).parent / "data"

X = (1, 10, 15)
Y = (1, 40, 60)
Z = (2, 20, 30)


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def two_stage_problem() -> MultiObjectiveProblem:
    """x1 <= 100, x1 + x2 <= 200, x >= 0 with objectives x1 and x2."""
    return MultiObjectiveProblem.linear([([1, 0], "<=", 100), ([1, 1], "<=", 200)], [[1, 0], [0, 1]])


@pytest.fixture
def simplex_problem() -> MultiObjectiveProblem:
    """x1 + x2 <= 1, x >= 0 with objectives x1 and x2."""
    return MultiObjectiveProblem.linear([([1, 1], "<=", 1)], [[1, 0], [0, 1]])


def additive(values) -> AllocationInstance:
    values = np.asarray(values)
    return AllocationInstance(values.shape[0], values.shape[1], [ValueOracle.additive(v) for v in values])


def corpus() -> dict[str, AllocationInstance]:
    out = {}
    for path in sorted((DATA / "allocation").glob("*.json")):
        out[path.stem] = instance_from_json(json.loads(path.read_text()))
    return out


def random_linear_problem(rng: np.random.Generator, max_vars: int = 4, max_objectives: int = 4) -> MultiObjectiveProblem:
    """Random bounded problem: a box ``[0, 10]^d`` cut by a few rows that keep the origin feasible."""
    d = int(rng.integers(1, max_vars + 1))
    n = int(rng.integers(1, max_objectives + 1))
    rows = []
    for _ in range(int(rng.integers(0, 5))):
        a = rng.integers(-2, 5, d).astype(float)
        rows.append((a, "<=", float(rng.integers(1, 20))))
    objectives = rng.integers(-1, 6, (n, d)).astype(float)
    return MultiObjectiveProblem.linear(rows, objectives, [(0.0, 10.0)] * d)


def random_finite_problem(rng: np.random.Generator, max_objectives: int = 5, max_candidates: int = 40) -> MultiObjectiveProblem:
    n = int(rng.integers(1, max_objectives + 1))
    count = int(rng.integers(1, max_candidates + 1))
    return MultiObjectiveProblem.finite(rng.integers(0, 21, (count, n)))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
