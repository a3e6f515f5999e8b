"""Saturation-based leximin for linear problems, and how it breaks under inexact solvers.

Each round maximizes the smallest unsaturated objective, then tests every
unsaturated objective for whether it can be pushed beyond that level.  The
test compares two solver outputs for equality, so a solver that reports a
slightly lower optimum in the first step makes every test fail and the loop
never terminates.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .linprog import LinearProgram, LpSolution, solve
from .programs import KindError, MultiObjectiveProblem

Solver = Callable[[LinearProgram], LpSolution]


class IterationCapExceeded(RuntimeError):
    """The saturation loop hit its iteration cap; ``rounds`` holds what was done."""

    def __init__(self, message: str, rounds: list[SaturationRound]):
        super().__init__(message)
        self.rounds = rounds


@dataclass(frozen=True)
class SaturationRound:
    level: float
    tests: dict[int, float]
    newly_saturated: tuple[int, ...]


@dataclass
class SaturationResult:
    solution: np.ndarray
    utilities: np.ndarray
    levels: dict[int, float]
    rounds: list[SaturationRound] = field(default_factory=list)


def scaled_solver(factor: float, inner: Solver = solve) -> Solver:
    """A solver that returns the true optimizer but reports ``factor`` times its value."""

    def run(lp: LinearProgram) -> LpSolution:
        sol = inner(lp)
        if not sol.optimal:
            return sol
        return LpSolution(sol.status, sol.x, sol.objective_value * factor, sol.pivots)

    return run


def _level_program(
    problem: MultiObjectiveProblem,
    fixed: dict[int, float],
    floor: float | None,
    target: int | None,
) -> LinearProgram:
    """max v over [x, v]: fixed objectives keep their level and the others stay above ``floor``.

    Without ``target`` every free objective must reach ``v``; with it only
    ``target`` must, while the other free objectives must reach ``floor``.
    """
    d = problem.dim
    region = problem.region
    rows, rel, rhs = [], [], []
    for i in range(region.num_rows):
        rows.append(np.append(region.A[i], 0.0))
        rel.append(region.rel[i])
        rhs.append(region.b[i])
    for i in range(problem.n):
        f = problem.objectives[i]
        if i in fixed:
            rows.append(np.append(f, 0.0))
            rhs.append(fixed[i])
        elif target is None or i == target:
            rows.append(np.append(f, -1.0))
            rhs.append(0.0)
        else:
            rows.append(np.append(f, 0.0))
            rhs.append(floor)
        rel.append(">=")
    c = np.zeros(d + 1)
    c[d] = 1.0
    lower = np.append(region.lower, -np.inf)
    upper = np.append(region.upper, np.inf)
    return LinearProgram("max", c, np.array(rows), tuple(rel), np.array(rhs), lower, upper)


def saturation_solve(
    problem: MultiObjectiveProblem,
    max_iter: int | None = None,
    solver: Solver = solve,
    test_solver: Solver = solve,
    tol: float = 1e-9,
) -> SaturationResult:
    """Run the saturation loop.

    Args:
        problem: A linear multi-objective problem.
        max_iter: Cap on rounds; defaults to ten times the number of objectives.
        solver: Used for the max-min step of every round.
        test_solver: Used for the per-objective saturation tests.
        tol: Relative tolerance of the equality test.

    Raises:
        IterationCapExceeded: If objectives remain unsaturated after ``max_iter`` rounds.
    """
    if problem.kind != "linear":
        raise KindError("saturation needs a linear problem")
    n = problem.n
    cap = 10 * n if max_iter is None else max_iter
    fixed: dict[int, float] = {}
    rounds: list[SaturationRound] = []
    x = None
    for _ in range(cap):
        if len(fixed) == n:
            break
        top = solver(_level_program(problem, fixed, None, None))
        if not top.optimal:
            raise RuntimeError(f"max-min step is {top.status}")
        level = top.objective_value
        x = top.x[: problem.dim]
        tests, new = {}, []
        for k in range(n):
            if k in fixed:
                continue
            sol = test_solver(_level_program(problem, fixed, level, k))
            value = sol.objective_value if sol.optimal else -np.inf
            tests[k] = value
            if abs(value - level) <= tol * max(1.0, abs(level)):
                new.append(k)
        for k in new:
            fixed[k] = level
        rounds.append(SaturationRound(level, tests, tuple(new)))
    if len(fixed) < n:
        raise IterationCapExceeded(f"{n - len(fixed)} objectives unsaturated after {cap} rounds", rounds)
    return SaturationResult(x.copy(), problem.utilities(x), fixed, rounds)
