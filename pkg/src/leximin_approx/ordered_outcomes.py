"""The ordered-outcomes loop and the single-objective procedures it calls.

The loop runs ``t = 1 .. n``; at each step a procedure (an "OP") receives
the problem and the ledger of constants fixed so far and returns a point
together with the next constant ``z_t``.  Exact procedures give the leximin
optimum.  A procedure that is only an (alpha, eps)-approximation yields a
solution whose quality is ``factor_transform(alpha, eps)``; if it succeeds
only with probability ``p`` per call, the whole run succeeds with
probability ``p ** n``.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .linprog import LinearProgram, solve
from .order import EXACT, TOL, ApproxFactors, PreferenceWitness, factor_transform, is_leximin_preferred
from .programs import (
    IterationLedger,
    KindError,
    MultiObjectiveProblem,
    P3Layout,
    build_p3,
    check_p2compact_feasible,
    eval_p2compact_objective,
    region_vertices,
)


class OpFailure(RuntimeError):
    """A single-objective procedure could not produce a feasible outcome."""


@dataclass(frozen=True)
class OpOutcome:
    x: object
    z_t: float


@dataclass(frozen=True)
class OpContract:
    """What a procedure promises: approximation factors, with probability ``p`` per call."""

    factors: ApproxFactors = EXACT
    p: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.p <= 1.0):
            raise ValueError(f"success probability must lie in (0, 1], got {self.p}")


EXACT_CONTRACT = OpContract()

Op = Callable[[MultiObjectiveProblem, IterationLedger], OpOutcome]


@dataclass(frozen=True)
class LeximinResult:
    solution: object
    utilities: np.ndarray
    ledger: IterationLedger
    claimed_factors: ApproxFactors
    claimed_probability: float

    @property
    def sorted_utilities(self) -> np.ndarray:
        return np.sort(self.utilities)


def run_ordered_outcomes(problem: MultiObjectiveProblem, op: Op, contract: OpContract | None = None) -> LeximinResult:
    """Run the ordered-outcomes loop with procedure ``op``; returns the last point."""
    if contract is None:
        contract = getattr(op, "contract", EXACT_CONTRACT)
    ledger = IterationLedger()
    for t in range(1, problem.n + 1):
        out = op(problem, ledger)
        if not check_p2compact_feasible(problem, ledger, out.x):
            raise OpFailure(f"procedure returned an infeasible point at iteration {t}")
        ledger = ledger.extended(out.x, out.z_t)
    x_n = ledger.witnesses[-1]
    return LeximinResult(
        solution=x_n,
        utilities=problem.utilities(x_n),
        ledger=ledger,
        claimed_factors=factor_transform(contract.factors),
        claimed_probability=contract.p ** problem.n,
    )


# ---------------------------------------------------------------------------
# exact procedures


def exact_lp_op(problem: MultiObjectiveProblem, ledger: IterationLedger) -> OpOutcome:
    """Solve the auxiliary-variable LP of the current iteration with the simplex solver."""
    if problem.kind != "linear":
        raise KindError("exact_lp_op needs a linear problem")
    sol = solve(build_p3(problem, ledger))
    if not sol.optimal:
        raise OpFailure(f"iteration {ledger.t} subproblem is {sol.status}")
    x = sol.x[: problem.dim].copy()
    return OpOutcome(x, float(sol.x[P3Layout(problem.dim, problem.n, ledger.t).z]))


def exact_enum_op(problem: MultiObjectiveProblem, ledger: IterationLedger) -> OpOutcome:
    """Enumerate the candidates and keep the feasible one of largest value (smallest index on ties)."""
    if problem.kind != "finite":
        raise KindError("exact_enum_op needs a finite problem")
    best, best_val = None, -np.inf
    for i in range(problem.candidates.shape[0]):
        if not check_p2compact_feasible(problem, ledger, i):
            continue
        val = eval_p2compact_objective(problem, ledger, i)
        if val > best_val:
            best, best_val = i, val
    if best is None:
        raise OpFailure(f"no candidate is feasible at iteration {ledger.t}")
    return OpOutcome(best, best_val)


def exact_op(problem: MultiObjectiveProblem, ledger: IterationLedger) -> OpOutcome:
    if problem.kind == "linear":
        return exact_lp_op(problem, ledger)
    return exact_enum_op(problem, ledger)


exact_lp_op.contract = EXACT_CONTRACT
exact_enum_op.contract = EXACT_CONTRACT
exact_op.contract = EXACT_CONTRACT


# ---------------------------------------------------------------------------
# degraded procedures


def _low_value_point(problem: MultiObjectiveProblem, ledger: IterationLedger) -> np.ndarray | None:
    """A feasible point with small objective sum, found by an LP over the prefix constraints."""
    lp = build_p3(problem, ledger)
    lay = P3Layout(problem.dim, problem.n, ledger.t)
    c = np.zeros(lay.size)
    c[: problem.dim] = -problem.objectives.sum(axis=0)
    low = LinearProgram(lp.direction, c, lp.A, lp.rel, lp.b, lp.lower, lp.upper, lp.names)
    sol = solve(low)
    if not sol.optimal:
        return None
    return sol.x[: problem.dim].copy()


def _point_for_value(problem: MultiObjectiveProblem, ledger: IterationLedger, best_x, z: float):
    """A feasible point supporting ``z`` whose own value is as close to ``z`` as practical."""
    if problem.kind == "finite":
        chosen, chosen_val = None, np.inf
        for i in range(problem.candidates.shape[0]):
            if not check_p2compact_feasible(problem, ledger, i):
                continue
            val = eval_p2compact_objective(problem, ledger, i)
            if z - TOL <= val < chosen_val:
                chosen, chosen_val = i, val
        return chosen if chosen is not None else best_x

    hi = np.asarray(best_x, dtype=float)
    hi_val = eval_p2compact_objective(problem, ledger, hi)
    lows = [w for w in ledger.witnesses[-1:]]
    lp_low = _low_value_point(problem, ledger)
    if lp_low is not None:
        lows.append(lp_low)
    lows = [np.asarray(w, dtype=float) for w in lows if check_p2compact_feasible(problem, ledger, w)]
    below = [(eval_p2compact_objective(problem, ledger, w), w) for w in lows]
    below.sort(key=lambda p: p[0])
    if not below or below[0][0] > z:
        above = [(v, w) for v, w in below if v >= z - TOL] + [(hi_val, hi)]
        return min(above, key=lambda p: p[0])[1]
    lo = below[0][1]
    # the value is concave along the segment, so bisection finds a point with value z
    a, b = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (a + b)
        if eval_p2compact_objective(problem, ledger, lo + mid * (hi - lo)) >= z:
            b = mid
        else:
            a = mid
    return lo + b * (hi - lo)


class NoisyOp:
    """Degrade an exact procedure into an (alpha, eps)-approximation.

    The achieved value is replaced by a uniform draw from
    ``[alpha * z* - eps, z*]`` and a feasible point supporting that value is
    returned in place of the optimizer.
    """

    def __init__(self, inner: Op, factors: ApproxFactors, seed: int | None = None):
        self.inner = inner
        self.factors = factors
        self.rng = np.random.default_rng(seed)
        self.contract = OpContract(factors, getattr(inner, "contract", EXACT_CONTRACT).p)

    def __call__(self, problem: MultiObjectiveProblem, ledger: IterationLedger) -> OpOutcome:
        out = self.inner(problem, ledger)
        if self.factors.exact:
            return out
        z_star = out.z_t
        lo = self.factors.alpha * z_star - self.factors.epsilon
        z = float(self.rng.uniform(lo, z_star)) if lo < z_star else z_star
        x = _point_for_value(problem, ledger, out.x, z)
        return OpOutcome(x, z)


def noisy_op(inner: Op, factors: ApproxFactors, seed: int | None = None) -> NoisyOp:
    return NoisyOp(inner, factors, seed)


class RandomizedOp:
    """With probability ``1 - p`` return a feasible outcome that carries no guarantee."""

    def __init__(self, inner: Op, p: float, seed: int | None = None):
        inner_contract = getattr(inner, "contract", EXACT_CONTRACT)
        self.contract = OpContract(inner_contract.factors, p * inner_contract.p)
        self.inner = inner
        self.p = p
        self.rng = np.random.default_rng(seed)
        self.calls = 0
        self.successes = 0

    def __call__(self, problem: MultiObjectiveProblem, ledger: IterationLedger) -> OpOutcome:
        self.calls += 1
        if self.p >= 1.0 or self.rng.random() < self.p:
            self.successes += 1
            return self.inner(problem, ledger)
        return self._fallback(problem, ledger)

    def _fallback(self, problem: MultiObjectiveProblem, ledger: IterationLedger) -> OpOutcome:
        if problem.kind == "finite":
            feasible = [i for i in range(problem.candidates.shape[0]) if check_p2compact_feasible(problem, ledger, i)]
            x = int(self.rng.choice(feasible))
        else:
            x = _low_value_point(problem, ledger)
            if x is None:
                raise OpFailure(f"iteration {ledger.t} subproblem is infeasible")
        return OpOutcome(x, eval_p2compact_objective(problem, ledger, x))


def randomized_op(inner: Op, p: float, seed: int | None = None) -> RandomizedOp:
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must lie in (0, 1], got {p}")
    return RandomizedOp(inner, p, seed)


class ScriptedOp:
    """Replay a fixed list of ``(z_t, x_t)`` outcomes, one per iteration."""

    def __init__(self, steps: Sequence[tuple[float, object]], factors: ApproxFactors = EXACT):
        self.steps = [(float(z), x) for z, x in steps]
        self.contract = OpContract(factors)

    def __call__(self, problem: MultiObjectiveProblem, ledger: IterationLedger) -> OpOutcome:
        if ledger.t > len(self.steps):
            raise OpFailure(f"script has no step for iteration {ledger.t}")
        z, x = self.steps[ledger.t - 1]
        if problem.kind == "linear":
            x = np.asarray(x, dtype=float)
        else:
            x = int(x)
        value = eval_p2compact_objective(problem, ledger, x)
        if z > value + 1e-7 * max(1.0, abs(value)):
            raise OpFailure(f"scripted z_{ledger.t} = {z} is not supported by its point (value {value})")
        return OpOutcome(x, z)


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerificationReport:
    factors: ApproxFactors
    violations: list[tuple[int, PreferenceWitness]] = field(default_factory=list)
    infeasible_probes: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def default_probes(problem: MultiObjectiveProblem) -> list:
    """Every candidate of a finite problem, or every vertex of a linear one."""
    if problem.kind == "finite":
        return list(range(problem.candidates.shape[0]))
    return region_vertices(problem)


def verify_result(
    result: LeximinResult,
    problem: MultiObjectiveProblem,
    probes: Sequence | None = None,
    factors: ApproxFactors | None = None,
    tol: float = TOL,
) -> VerificationReport:
    """Check that no probe point is preferred over the result at the claimed factors."""
    factors = result.claimed_factors if factors is None else factors
    if probes is None:
        probes = default_probes(problem)
    report = VerificationReport(factors)
    for i, x in enumerate(probes):
        if not problem.contains(x):
            report.infeasible_probes.append(i)
            continue
        w = is_leximin_preferred(problem.utilities(x), result.utilities, factors, tol)
        if w is not None:
            report.violations.append((i, w))
    return report
